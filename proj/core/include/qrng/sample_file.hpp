#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "qrng/source_sim.hpp"

namespace qrng {

/// Raw capture file, all fields little-endian:
///
///   offset  size  field
///   0       4     magic "QRNS"
///   4       2     version (u16) = 1
///   6       1     channel count (u8) = 2
///   7       1     ADC bits (u8)
///   8       8     range_volts (f64)
///   16      8     sample count (u64)
///   24      4·N   interleaved (x, p) codes as sign-extended i16
inline constexpr std::size_t kSampleHeaderBytes = 24;
inline constexpr std::uint16_t kSampleFileVersion = 1;

/// Expected file size for `count` samples.
constexpr std::uint64_t sample_file_size(std::uint64_t count) {
  return kSampleHeaderBytes + 4 * count;
}

/// Throws FormatError for ADCs wider than 16 bits, IoError on write failure.
void write_samples(std::ostream& out, const SampleBlock& block);
void write_sample_file(const std::filesystem::path& path, const SampleBlock& block);

/// Throws FormatError (with byte offset) on bad magic, version, channel
/// count, truncated payload or out-of-range codes; IoError if unreadable.
SampleBlock read_samples(std::istream& in);
SampleBlock read_sample_file(const std::filesystem::path& path);

}  // namespace qrng
