#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qrng {

/// Packed bit sequence with an exact length.
///
/// Stream bit k lives in 64-bit word k/64 at position k%64, so serializing
/// the words little-endian places bit k in byte k/8 at position k%8 (LSB
/// first). Bits past size() in the last word are always zero.
class BitStream {
 public:
  BitStream() = default;
  /// All-zero stream of the given length.
  explicit BitStream(std::size_t bit_length);

  /// Takes the first bit_length bits of `bytes`; throws LengthError if
  /// bytes holds fewer bits.
  static BitStream from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_length);
  static BitStream from_bytes(std::span<const std::uint8_t> bytes) {
    return from_bytes(bytes, bytes.size() * 8);
  }
  /// Parses a string of '0'/'1' characters; other characters are skipped.
  static BitStream from_string(std::string_view text);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool operator[](std::size_t index) const noexcept {
    return (words_[index >> 6] >> (index & 63)) & 1u;
  }
  bool test(std::size_t index) const;
  void set(std::size_t index, bool value);

  void push_back(bool bit);
  /// Appends the low `count` bits of value, least significant first.
  void append_bits(std::uint64_t value, unsigned count);
  void append(const BitStream& other);

  /// Reads `count` (≤ 64) bits starting at `start` into the low bits of
  /// the result; bit j of the result is stream bit start+j.
  std::uint64_t read_bits(std::size_t start, unsigned count) const;

  BitStream slice(std::size_t start, std::size_t length) const;
  void truncate(std::size_t bit_length);
  void reserve(std::size_t bit_length) { words_.reserve((bit_length + 63) / 64); }

  std::size_t count_ones() const noexcept;
  std::size_t count_ones(std::size_t start, std::size_t length) const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::size_t byte_size() const noexcept { return (size_ + 7) / 8; }
  std::vector<std::uint8_t> to_bytes() const;
  std::string to_string() const;

  friend bool operator==(const BitStream&, const BitStream&) = default;
  BitStream& operator^=(const BitStream& other);

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

inline BitStream operator^(BitStream lhs, const BitStream& rhs) {
  lhs ^= rhs;
  return lhs;
}

}  // namespace qrng
