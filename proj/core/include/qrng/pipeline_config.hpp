#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrng/entropy.hpp"
#include "qrng/nist_tests.hpp"
#include "qrng/source_sim.hpp"

namespace qrng::pipeline {

/// Everything a pipeline command needs, loaded from a flat key=value file
/// (one pair per line, '#' starts a comment) and overridable from the CLI.
struct PipelineConfig {
  SourceConfig source;
  std::size_t samples = 1'000'000;

  std::size_t block_n = 4096;
  std::optional<std::size_t> block_m;  // unset: floor(ratio·n)
  std::optional<double> ratio;         // unset: take it from an entropy report

  std::optional<SnuReference> snu_reference;  // unset: self-normalize
  nist::BatteryConfig battery;
  std::size_t psd_segment = 1024;

  std::optional<std::filesystem::path> in;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> seed_file;
  std::optional<std::filesystem::path> vac_reference;

  /// Applies one key. Throws ConfigError for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);

  /// Checks cross-field invariants (source, battery, geometry).
  void validate() const;

  /// Key/value pairs in a stable order, suitable for manifests and for
  /// feeding back into parse().
  std::vector<std::pair<std::string, std::string>> snapshot() const;

  static PipelineConfig parse(std::istream& in, std::string_view source_name = "<config>");
  static PipelineConfig load(const std::filesystem::path& path);
};

}  // namespace qrng::pipeline
