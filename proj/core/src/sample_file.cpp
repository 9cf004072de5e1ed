#include "qrng/sample_file.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "qrng/error.hpp"

namespace qrng {

namespace {

constexpr std::array<char, 4> kMagic{'Q', 'R', 'N', 'S'};

template <typename T>
void put_le(std::vector<std::uint8_t>& buf, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

std::uint64_t get_le(const std::uint8_t* p, std::size_t size) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < size; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

std::string at_offset(std::uint64_t offset) { return " (byte offset " + std::to_string(offset) + ")"; }

}  // namespace

void write_samples(std::ostream& out, const SampleBlock& block) {
  if (block.adc.bits() > 16) {
    throw FormatError("sample file stores 16-bit codes; ADC has " +
                      std::to_string(block.adc.bits()) + " bits");
  }
  block.validate();

  std::vector<std::uint8_t> header;
  header.insert(header.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint16_t>(header, kSampleFileVersion);
  put_le<std::uint8_t>(header, 2);
  put_le<std::uint8_t>(header, static_cast<std::uint8_t>(block.adc.bits()));
  put_le<double>(header, block.adc.range_volts());
  put_le<std::uint64_t>(header, block.size());
  out.write(reinterpret_cast<const char*>(header.data()),
            static_cast<std::streamsize>(header.size()));

  constexpr std::size_t kChunk = 1 << 16;
  std::vector<std::uint8_t> payload;
  payload.reserve(4 * kChunk);
  for (std::size_t i = 0; i < block.size(); ++i) {
    put_le<std::uint16_t>(payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(block.codes_x[i])));
    put_le<std::uint16_t>(payload, static_cast<std::uint16_t>(static_cast<std::int16_t>(block.codes_p[i])));
    if (payload.size() >= 4 * kChunk) {
      out.write(reinterpret_cast<const char*>(payload.data()),
                static_cast<std::streamsize>(payload.size()));
      payload.clear();
    }
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("failed writing sample stream");
}

void write_sample_file(const std::filesystem::path& path, const SampleBlock& block) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_samples(out, block);
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

SampleBlock read_samples(std::istream& in) {
  std::array<std::uint8_t, kSampleHeaderBytes> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != static_cast<std::streamsize>(header.size())) {
    throw FormatError("truncated sample header" + at_offset(static_cast<std::uint64_t>(in.gcount())));
  }
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("bad magic, expected QRNS" + at_offset(0));
  }
  const auto version = static_cast<std::uint16_t>(get_le(header.data() + 4, 2));
  if (version != kSampleFileVersion) {
    throw FormatError("unsupported sample file version " + std::to_string(version) + at_offset(4));
  }
  if (header[6] != 2) {
    throw FormatError("expected 2 channels, found " + std::to_string(header[6]) + at_offset(6));
  }
  const int bits = header[7];
  if (bits < AdcSpec::kMinBits || bits > 16) {
    throw FormatError("ADC bit depth " + std::to_string(bits) + " not storable" + at_offset(7));
  }
  const double range = std::bit_cast<double>(get_le(header.data() + 8, 8));
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw FormatError("nonpositive ADC range" + at_offset(8));
  }
  const std::uint64_t count = get_le(header.data() + 16, 8);

  SampleBlock block;
  block.adc = AdcSpec(range, bits);
  // Grow incrementally so a corrupt count cannot trigger a huge allocation.
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<std::uint8_t> payload(4 * kChunk);
  std::uint64_t done = 0;
  while (done < count) {
    const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - done));
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(4 * want));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != 4 * want) {
      throw FormatError("truncated sample payload: header declares " + std::to_string(count) +
                        " samples" + at_offset(kSampleHeaderBytes + 4 * done + got));
    }
    for (std::size_t i = 0; i < want; ++i) {
      const auto x = static_cast<std::int16_t>(get_le(&payload[4 * i], 2));
      const auto p = static_cast<std::int16_t>(get_le(&payload[4 * i + 2], 2));
      if (x < block.adc.min_code() || x > block.adc.max_code() || p < block.adc.min_code() ||
          p > block.adc.max_code()) {
        throw FormatError("code outside the " + std::to_string(bits) + "-bit range" +
                          at_offset(kSampleHeaderBytes + 4 * (done + i)));
      }
      block.codes_x.push_back(x);
      block.codes_p.push_back(p);
    }
    done += want;
  }
  return block;
}

SampleBlock read_sample_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_samples(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace qrng
