#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qrng/bitstream.hpp"
#include "qrng/entropy.hpp"
#include "qrng/manifest.hpp"
#include "qrng/nist_tests.hpp"
#include "qrng/pipeline_config.hpp"
#include "qrng/source_sim.hpp"
#include "qrng/toeplitz.hpp"

namespace qrng::pipeline {

/// Unbiased sample variance of reconstructed volts.
double sample_variance(const std::vector<std::int32_t>& codes, double step_volts);

/// X-channel samples to raw bits: the low adc_bits bits of each two's
/// complement code, least significant first, sample after sample.
BitStream flatten_x_channel(const SampleBlock& block);

struct SimulateSummary {
  std::size_t samples = 0;
  double var_x_v2 = 0.0;
  double var_p_v2 = 0.0;
  std::size_t saturated = 0;
  std::uint64_t bytes_written = 0;
};

/// Simulates cfg.samples pairs at cfg.source and writes a QRNS file.
SimulateSummary cmd_simulate(const PipelineConfig& cfg, const std::filesystem::path& out);

struct CalibrationRow {
  double power_mw = 0.0;
  double var_x_v2 = 0.0;
  double var_p_v2 = 0.0;
  double qcnr_x_db = 0.0;  // −inf when no quantum excess is measured
  double qcnr_p_db = 0.0;
};

/// Laser-power sweep from start to end (inclusive) in `step` increments.
/// Every point reuses the configured seed, so points at or above the
/// saturation power produce identical captures.
std::vector<CalibrationRow> calibration_sweep(const PipelineConfig& cfg, double start, double end,
                                              double step, std::size_t samples_per_point);

/// Columns: power_mw,var_x_v2,var_p_v2,qcnr_x_db,qcnr_p_db.
std::string format_calibration_csv(const std::vector<CalibrationRow>& rows);

std::vector<CalibrationRow> cmd_calibrate(const PipelineConfig& cfg, double start, double end,
                                          double step, std::size_t samples_per_point,
                                          const std::filesystem::path& out_csv);

struct EntropyOutcome {
  CovarianceEstimate covariance;
  EntropyReport report;
};

/// Covariance → shot-noise normalization → H_min → Holevo bound → rate.
/// The reference comes from `reference`, else cfg.snu_reference, else the
/// capture itself. Throws CalibrationError when the capture carries no
/// quantum signal.
EntropyOutcome analyze_capture(const SampleBlock& block, const PipelineConfig& cfg,
                               std::optional<SnuReference> reference = std::nullopt);

/// Quadrature variances of a vacuum calibration capture.
SnuReference reference_from_capture(const SampleBlock& block, const PipelineConfig& cfg);

/// Reads a capture, analyzes it and writes the key=value report (when
/// report_path is non-empty). Calibration errors carry the file name.
EntropyOutcome cmd_entropy(const PipelineConfig& cfg, const std::filesystem::path& in,
                           const std::optional<std::filesystem::path>& vac_reference,
                           const std::filesystem::path& report_path);

struct ExtractOutcome {
  BitStream output;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t blocks = 0;
  double ratio = 0.0;
  std::optional<EntropyOutcome> entropy;
  RunManifest manifest;
};

/// Extracts the X channel of `block` with `seed`. With cfg.ratio unset the
/// ratio comes from a fresh entropy analysis of the same block and a
/// nonpositive rate is refused. The seed is trimmed to m rows when the
/// geometry asks for fewer rows than it provides.
ExtractOutcome extract_capture(const SampleBlock& block, const ToeplitzSeed& seed,
                               const PipelineConfig& cfg);

/// File-level extraction: writes the packed output bytes and
/// `<out>.manifest.json`.
ExtractOutcome cmd_extract(const PipelineConfig& cfg, const std::filesystem::path& in,
                           const std::filesystem::path& seed_file,
                           const std::filesystem::path& out);

/// Loads a seed; the sidecar header wins, otherwise cfg.block_n fixes n
/// and the file length fixes m (capped at n).
ToeplitzSeed load_seed(const std::filesystem::path& seed_file, const PipelineConfig& cfg);

/// Reads an extracted stream. The exact bit length comes from
/// `<in>.manifest.json` when present, else every byte counts.
BitStream read_extracted(const std::filesystem::path& in);

/// Runs the battery and optionally writes the report to out_report.
nist::BatteryResult cmd_test(const PipelineConfig& cfg, const std::filesystem::path& in,
                             const std::optional<std::filesystem::path>& out_report);

/// Columns: freq_bin,psd_x,psd_p; segment_len/2+1 rows.
std::string format_psd_csv(const PsdEstimate& psd);

PsdEstimate cmd_psd(const PipelineConfig& cfg, const std::filesystem::path& in,
                    std::size_t segment_len, const std::filesystem::path& out_csv);

/// Writes an m×n Toeplitz seed drawn from `rng_seed` (or the OS entropy
/// source when unset) plus its header.
ToeplitzSeed cmd_seedgen(std::size_t m, std::size_t n, std::optional<std::uint64_t> rng_seed,
                         const std::filesystem::path& out);

}  // namespace qrng::pipeline
