#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrng/entropy.hpp"

namespace qrng::pipeline {

/// Lowercase hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Provenance record written next to every extraction output as
/// `<output>.manifest.json`.
struct RunManifest {
  std::string tool_version;
  std::string command;
  std::string created_utc;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t source_seed = 0;
  std::optional<FileDigest> seed_file;
  std::size_t toeplitz_m = 0;
  std::size_t toeplitz_n = 0;
  double ratio = 0.0;
  std::optional<FileDigest> input;
  std::optional<FileDigest> output;
  std::size_t output_bits = 0;
  std::size_t blocks = 0;
  std::optional<CovarianceEstimate> covariance;
  std::optional<EntropyReport> entropy;
  std::vector<std::pair<std::string, std::string>> conventions;

  std::string to_json() const;
  void write(const std::filesystem::path& path) const;

  /// Throws FormatError on malformed JSON or missing fields.
  static RunManifest parse(const std::string& json);
  static RunManifest read(const std::filesystem::path& path);
};

std::filesystem::path manifest_path_for(const std::filesystem::path& output);

std::string tool_version();
std::string utc_timestamp();

}  // namespace qrng::pipeline
