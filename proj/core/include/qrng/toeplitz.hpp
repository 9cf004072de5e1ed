#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "qrng/bitstream.hpp"

namespace qrng {

/// Seed of an m×n Toeplitz matrix over GF(2): exactly m+n−1 bits, 1 ≤ m ≤ n.
class ToeplitzSeed {
 public:
  /// Throws GeometryError on a length mismatch or m outside [1, n].
  ToeplitzSeed(BitStream bits, std::size_t m, std::size_t n);

  const BitStream& bits() const noexcept { return bits_; }
  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }

  /// Seed of the top `m` rows of this matrix (its first m+n−1 bits).
  ToeplitzSeed with_rows(std::size_t m) const;

 private:
  BitStream bits_;
  std::size_t m_;
  std::size_t n_;
};

/// Read-only view of the matrix a seed defines:
/// T[i][j] = seed[i + (n−1) − j], constant along each diagonal.
class ToeplitzMatrix {
 public:
  explicit ToeplitzMatrix(const ToeplitzSeed& seed) : seed_(&seed) {}

  std::size_t rows() const noexcept { return seed_->rows(); }
  std::size_t cols() const noexcept { return seed_->cols(); }
  bool at(std::size_t i, std::size_t j) const {
    return seed_->bits()[i + (seed_->cols() - 1) - j];
  }
  BitStream row(std::size_t i) const;

 private:
  const ToeplitzSeed* seed_;
};

ToeplitzMatrix build_matrix(const ToeplitzSeed& seed);

/// Word-packed Toeplitz hashing.
///
/// Row i of the product equals the parity of seed[i, i+n) AND reversed(x),
/// so the extractor keeps 64 copies of the seed pre-shifted by 0..63 bits;
/// every row then reduces to an aligned AND/XOR sweep over n/64 words and a
/// single popcount.
class ToeplitzExtractor {
 public:
  explicit ToeplitzExtractor(ToeplitzSeed seed);

  const ToeplitzSeed& seed() const noexcept { return seed_; }
  std::size_t input_bits() const noexcept { return seed_.cols(); }
  std::size_t output_bits() const noexcept { return seed_.rows(); }

  /// Throws LengthError unless input.size() == n.
  BitStream extract_block(const BitStream& input) const;

  /// Hashes consecutive n-bit blocks of `raw` (a trailing partial block is
  /// dropped) and concatenates the m-bit outputs in block order. Throws
  /// GeometryError when m/n exceeds `ratio` or ratio is outside (0, 1].
  BitStream extract_stream(const BitStream& raw, double ratio) const;

 private:
  void hash_block(const BitStream& raw, std::size_t offset, std::vector<std::uint64_t>& reversed,
                  BitStream& out) const;

  ToeplitzSeed seed_;
  std::size_t input_words_;
  std::array<std::vector<std::uint64_t>, 64> shifted_;
};

BitStream extract_block(const ToeplitzSeed& seed, const BitStream& input);
BitStream extract_stream(const ToeplitzSeed& seed, const BitStream& raw, double ratio);

/// Rows for a given ratio: floor(ratio·n). Throws GeometryError when that is 0.
std::size_t rows_for_ratio(double ratio, std::size_t n);

/// Seed file: packed LSB-first bytes, ceil((m+n−1)/8) long, plus a sidecar
/// `<path>.hdr` holding one line "m=<m> n=<n>".
void write_seed_file(const std::filesystem::path& path, const ToeplitzSeed& seed);

/// Reads a seed. Explicit m/n override the sidecar header; if the file holds
/// more bits than m+n−1 only the leading bits are used.
ToeplitzSeed read_seed_file(const std::filesystem::path& path,
                            std::optional<std::size_t> m = std::nullopt,
                            std::optional<std::size_t> n = std::nullopt);

std::filesystem::path seed_header_path(const std::filesystem::path& seed_path);

}  // namespace qrng
