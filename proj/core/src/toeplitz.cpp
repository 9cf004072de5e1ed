#include "qrng/toeplitz.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>

#include "qrng/error.hpp"

namespace qrng {

namespace {

std::uint64_t reverse_bits(std::uint64_t v) {
  v = ((v >> 1) & 0x5555555555555555ull) | ((v & 0x5555555555555555ull) << 1);
  v = ((v >> 2) & 0x3333333333333333ull) | ((v & 0x3333333333333333ull) << 2);
  v = ((v >> 4) & 0x0f0f0f0f0f0f0f0full) | ((v & 0x0f0f0f0f0f0f0f0full) << 4);
  return __builtin_bswap64(v);
}

}  // namespace

ToeplitzSeed::ToeplitzSeed(BitStream bits, std::size_t m, std::size_t n)
    : bits_(std::move(bits)), m_(m), n_(n) {
  if (n == 0 || m == 0 || m > n) {
    throw GeometryError("Toeplitz geometry requires 1 <= m <= n (m=" + std::to_string(m) +
                        ", n=" + std::to_string(n) + ")");
  }
  if (bits_.size() != m + n - 1) {
    throw GeometryError("Toeplitz seed must hold m+n-1 = " + std::to_string(m + n - 1) +
                        " bits, got " + std::to_string(bits_.size()));
  }
}

ToeplitzSeed ToeplitzSeed::with_rows(std::size_t m) const {
  if (m == 0 || m > m_) {
    throw GeometryError("cannot take " + std::to_string(m) + " rows from a seed with " +
                        std::to_string(m_));
  }
  return ToeplitzSeed(bits_.slice(0, m + n_ - 1), m, n_);
}

BitStream ToeplitzMatrix::row(std::size_t i) const {
  BitStream out(cols());
  for (std::size_t j = 0; j < cols(); ++j) out.set(j, at(i, j));
  return out;
}

ToeplitzMatrix build_matrix(const ToeplitzSeed& seed) { return ToeplitzMatrix(seed); }

ToeplitzExtractor::ToeplitzExtractor(ToeplitzSeed seed)
    : seed_(std::move(seed)), input_words_((seed_.cols() + 63) / 64) {
  // Row i reads seed words (i/64) .. (i/64 + input_words_) of shift i%64.
  const std::size_t words = (seed_.rows() + 63) / 64 + input_words_ + 1;
  const auto source = seed_.bits().words();
  const auto word_at = [&](std::size_t w) -> std::uint64_t {
    return w < source.size() ? source[w] : 0;
  };
  for (unsigned r = 0; r < 64; ++r) {
    auto& dst = shifted_[r];
    dst.resize(words);
    for (std::size_t w = 0; w < words; ++w) {
      dst[w] = r == 0 ? word_at(w) : (word_at(w) >> r) | (word_at(w + 1) << (64 - r));
    }
  }
}

void ToeplitzExtractor::hash_block(const BitStream& raw, std::size_t offset,
                                   std::vector<std::uint64_t>& reversed, BitStream& out) const {
  const std::size_t n = seed_.cols();
  const std::size_t m = seed_.rows();
  // reversed bit k = input bit n−1−k, packed LSB first; bits past n stay 0.
  for (std::size_t k = 0; k < input_words_; ++k) {
    const auto take = static_cast<unsigned>(std::min<std::size_t>(64, n - 64 * k));
    const std::uint64_t w = raw.read_bits(offset + n - 64 * k - take, take);
    reversed[k] = reverse_bits(w) >> (64 - take);
  }

  const std::uint64_t* y = reversed.data();
  std::uint64_t packed = 0;
  unsigned filled = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint64_t* s = shifted_[i & 63].data() + (i >> 6);
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < input_words_; ++k) acc ^= s[k] & y[k];
    packed |= static_cast<std::uint64_t>(std::popcount(acc) & 1) << filled;
    if (++filled == 64) {
      out.append_bits(packed, 64);
      packed = 0;
      filled = 0;
    }
  }
  out.append_bits(packed, filled);
}

BitStream ToeplitzExtractor::extract_block(const BitStream& input) const {
  if (input.size() != seed_.cols()) {
    throw LengthError("extract_block expects " + std::to_string(seed_.cols()) +
                      " input bits, got " + std::to_string(input.size()));
  }
  std::vector<std::uint64_t> reversed(input_words_, 0);
  BitStream out;
  out.reserve(seed_.rows());
  hash_block(input, 0, reversed, out);
  return out;
}

BitStream ToeplitzExtractor::extract_stream(const BitStream& raw, double ratio) const {
  if (!(ratio > 0.0) || ratio > 1.0) {
    throw GeometryError("extraction ratio must lie in (0, 1]");
  }
  const std::size_t n = seed_.cols();
  const std::size_t m = seed_.rows();
  if (static_cast<double>(m) > ratio * static_cast<double>(n)) {
    throw GeometryError("block geometry m/n = " + std::to_string(m) + "/" + std::to_string(n) +
                        " exceeds the extractable ratio " + std::to_string(ratio));
  }

  const std::size_t blocks = raw.size() / n;
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(blocks, 1));
  // Contiguous block ranges per worker, concatenated in order afterwards.
  std::vector<BitStream> parts(workers);
  auto run = [&](std::size_t worker) {
    const std::size_t begin = blocks * worker / workers;
    const std::size_t end = blocks * (worker + 1) / workers;
    std::vector<std::uint64_t> reversed(input_words_, 0);
    parts[worker].reserve((end - begin) * m);
    for (std::size_t b = begin; b < end; ++b) hash_block(raw, b * n, reversed, parts[worker]);
  };
  if (workers == 1) {
    run(0);
    return std::move(parts[0]);
  }
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  BitStream out;
  out.reserve(blocks * m);
  for (const auto& part : parts) out.append(part);
  return out;
}

BitStream extract_block(const ToeplitzSeed& seed, const BitStream& input) {
  return ToeplitzExtractor(seed).extract_block(input);
}

BitStream extract_stream(const ToeplitzSeed& seed, const BitStream& raw, double ratio) {
  return ToeplitzExtractor(seed).extract_stream(raw, ratio);
}

std::size_t rows_for_ratio(double ratio, std::size_t n) {
  if (!(ratio > 0.0) || ratio > 1.0) throw GeometryError("extraction ratio must lie in (0, 1]");
  const auto m = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (m == 0) throw GeometryError("extraction ratio too small for block size " + std::to_string(n));
  return m;
}

std::filesystem::path seed_header_path(const std::filesystem::path& seed_path) {
  auto p = seed_path;
  p += ".hdr";
  return p;
}

void write_seed_file(const std::filesystem::path& path, const ToeplitzSeed& seed) {
  const auto bytes = seed.bits().to_bytes();
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
  }
  std::ofstream hdr(seed_header_path(path), std::ios::trunc);
  if (!hdr) throw IoError("cannot open " + seed_header_path(path).string() + " for writing");
  hdr << "m=" << seed.rows() << " n=" << seed.cols() << '\n';
  if (!hdr) throw IoError("failed writing seed header");
}

ToeplitzSeed read_seed_file(const std::filesystem::path& path, std::optional<std::size_t> m,
                            std::optional<std::size_t> n) {
  if (!m || !n) {
    std::ifstream hdr(seed_header_path(path));
    if (!hdr) {
      throw IoError("seed geometry not given and header " + seed_header_path(path).string() +
                    " is unreadable");
    }
    std::string token;
    while (hdr >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw FormatError("malformed seed header token '" + token + "'");
      const std::string key = token.substr(0, eq);
      std::size_t value = 0;
      try {
        value = std::stoull(token.substr(eq + 1));
      } catch (const std::exception&) {
        throw FormatError("malformed seed header value '" + token + "'");
      }
      if (key == "m") {
        if (!m) m = value;
      } else if (key == "n") {
        if (!n) n = value;
      } else {
        throw FormatError("unknown seed header key '" + key + "'");
      }
    }
    if (!m || !n) throw FormatError("seed header must declare m and n");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open seed file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (*n == 0 || *m == 0) throw GeometryError("seed geometry must be positive");
  const std::size_t need = *m + *n - 1;
  if (bytes.size() * 8 < need) {
    throw GeometryError("seed file " + path.string() + " holds " + std::to_string(bytes.size() * 8) +
                        " bits, geometry needs " + std::to_string(need));
  }
  return ToeplitzSeed(BitStream::from_bytes(bytes, need), *m, *n);
}

}  // namespace qrng
