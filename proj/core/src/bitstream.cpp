#include "qrng/bitstream.hpp"

#include <bit>
#include <string>

#include "qrng/error.hpp"

namespace qrng {

namespace {

constexpr std::uint64_t low_mask(unsigned count) {
  return count >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << count) - 1;
}

}  // namespace

BitStream::BitStream(std::size_t bit_length)
    : words_((bit_length + 63) / 64, 0), size_(bit_length) {}

BitStream BitStream::from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_length) {
  if (bit_length > bytes.size() * 8) {
    throw LengthError("requested " + std::to_string(bit_length) + " bits from a " +
                      std::to_string(bytes.size()) + "-byte buffer");
  }
  BitStream out(bit_length);
  const std::size_t nbytes = (bit_length + 7) / 8;
  for (std::size_t i = 0; i < nbytes; ++i) {
    out.words_[i >> 3] |= std::uint64_t{bytes[i]} << (8 * (i & 7));
  }
  out.truncate(bit_length);
  return out;
}

BitStream BitStream::from_string(std::string_view text) {
  BitStream out;
  for (char c : text) {
    if (c == '0' || c == '1') out.push_back(c == '1');
  }
  return out;
}

bool BitStream::test(std::size_t index) const {
  if (index >= size_) throw LengthError("bit index out of range");
  return (*this)[index];
}

void BitStream::set(std::size_t index, bool value) {
  if (index >= size_) throw LengthError("bit index out of range");
  const std::uint64_t bit = std::uint64_t{1} << (index & 63);
  if (value) {
    words_[index >> 6] |= bit;
  } else {
    words_[index >> 6] &= ~bit;
  }
}

void BitStream::push_back(bool bit) {
  if ((size_ & 63) == 0) words_.push_back(0);
  if (bit) words_[size_ >> 6] |= std::uint64_t{1} << (size_ & 63);
  ++size_;
}

void BitStream::append_bits(std::uint64_t value, unsigned count) {
  if (count == 0) return;
  if (count > 64) throw LengthError("append_bits supports at most 64 bits");
  value &= low_mask(count);
  const unsigned offset = size_ & 63;
  if (offset == 0) {
    words_.push_back(value);
  } else {
    words_.back() |= value << offset;
    if (offset + count > 64) words_.push_back(value >> (64 - offset));
  }
  size_ += count;
}

void BitStream::append(const BitStream& other) {
  const std::size_t full = other.size_ / 64;
  reserve(size_ + other.size_);
  for (std::size_t w = 0; w < full; ++w) append_bits(other.words_[w], 64);
  const unsigned rest = other.size_ & 63;
  if (rest != 0) append_bits(other.words_[full], rest);
}

std::uint64_t BitStream::read_bits(std::size_t start, unsigned count) const {
  if (count == 0) return 0;
  if (count > 64 || start + count > size_) throw LengthError("read_bits out of range");
  const std::size_t w = start >> 6;
  const unsigned offset = start & 63;
  std::uint64_t value = words_[w] >> offset;
  if (offset != 0 && offset + count > 64) value |= words_[w + 1] << (64 - offset);
  return value & low_mask(count);
}

BitStream BitStream::slice(std::size_t start, std::size_t length) const {
  if (start + length > size_) throw LengthError("slice out of range");
  BitStream out;
  out.reserve(length);
  std::size_t pos = start;
  std::size_t remaining = length;
  while (remaining > 0) {
    const unsigned take = remaining >= 64 ? 64u : static_cast<unsigned>(remaining);
    out.append_bits(read_bits(pos, take), take);
    pos += take;
    remaining -= take;
  }
  return out;
}

void BitStream::truncate(std::size_t bit_length) {
  if (bit_length > size_) throw LengthError("truncate beyond current length");
  size_ = bit_length;
  words_.resize((bit_length + 63) / 64);
  if ((bit_length & 63) != 0) words_.back() &= low_mask(bit_length & 63);
}

std::size_t BitStream::count_ones() const noexcept {
  std::size_t total = 0;
  for (std::uint64_t w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::size_t BitStream::count_ones(std::size_t start, std::size_t length) const {
  if (start + length > size_) throw LengthError("count_ones range out of bounds");
  std::size_t total = 0;
  std::size_t pos = start;
  const std::size_t end = start + length;
  while (pos < end && (pos & 63) != 0) total += (*this)[pos++];
  while (pos + 64 <= end) {
    total += static_cast<std::size_t>(std::popcount(words_[pos >> 6]));
    pos += 64;
  }
  while (pos < end) total += (*this)[pos++];
  return total;
}

std::vector<std::uint8_t> BitStream::to_bytes() const {
  std::vector<std::uint8_t> out(byte_size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(words_[i >> 3] >> (8 * (i & 7)));
  }
  return out;
}

std::string BitStream::to_string() const {
  std::string out(size_, '0');
  for (std::size_t i = 0; i < size_; ++i) {
    if ((*this)[i]) out[i] = '1';
  }
  return out;
}

BitStream& BitStream::operator^=(const BitStream& other) {
  if (other.size_ != size_) throw LengthError("XOR of streams with different lengths");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  return *this;
}

}  // namespace qrng
