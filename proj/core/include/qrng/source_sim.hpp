#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "qrng/noise_model.hpp"

namespace qrng {

/// Operating point of the simulated dual-homodyne source.
///
/// Quantum variance per channel grows as slope·min(power, sat_power); the
/// classical variance is power independent. Defaults reproduce the raw
/// variances 5.9394e-4 V² (X) and 6.3054e-4 V² (P) at 9 mW with a 1 V,
/// 14-bit ADC.
struct SourceConfig {
  static constexpr double kDefaultRawVarX = 5.9394e-4;
  static constexpr double kDefaultRawVarP = 6.3054e-4;
  static constexpr double kDefaultClassicalVarX = 0.6037e-4;
  static constexpr double kDefaultClassicalVarP = 0.5841e-4;
  static constexpr double kDefaultSatPowerMw = 9.0;

  double power_mw = kDefaultSatPowerMw;
  double slope_x = (kDefaultRawVarX - kDefaultClassicalVarX) / kDefaultSatPowerMw;  // V²/mW
  double slope_p = (kDefaultRawVarP - kDefaultClassicalVarP) / kDefaultSatPowerMw;  // V²/mW
  double sat_power_mw = kDefaultSatPowerMw;
  double classical_var_x = kDefaultClassicalVarX;
  double classical_var_p = kDefaultClassicalVarP;
  double xp_covariance = 0.0;  // quantum X/P covariance, V²
  AdcSpec adc{1.0, 14};
  std::uint64_t seed = 1;

  /// Quantum variances (V²) of X and P at the configured power.
  std::pair<double, double> quantum_variances() const;

  /// Throws DomainError on a nonpositive saturation point, negative
  /// power/slopes/variances, or a covariance that makes the quadrature
  /// covariance matrix indefinite.
  void validate() const;
};

/// Total modeled raw variance (quantum + classical, V²) of each channel at
/// `power_mw`. Piecewise linear with a hard knee at sat_power_mw.
std::pair<double, double> power_response(const SourceConfig& config, double power_mw);

/// Mid-tread quantizer: clamp(round(v/δ)) with round-half-away-from-zero.
std::int32_t quantize_voltage(double volts, const AdcSpec& adc);
/// Same, incrementing `saturated` when the code was clamped.
std::int32_t quantize_voltage(double volts, const AdcSpec& adc, std::size_t& saturated);

/// Dual-channel digitized capture.
struct SampleBlock {
  AdcSpec adc{1.0, 14};
  std::vector<std::int32_t> codes_x;
  std::vector<std::int32_t> codes_p;
  std::size_t saturated = 0;  // clamped samples across both channels

  std::size_t size() const noexcept { return codes_x.size(); }
  double volts_x(std::size_t i) const { return codes_x[i] * adc.step_volts(); }
  double volts_p(std::size_t i) const { return codes_p[i] * adc.step_volts(); }

  /// Throws FormatError if the channels differ in length or a code lies
  /// outside the ADC range.
  void validate() const;
};

/// Samples per independently seeded generator chunk inside a block.
inline constexpr std::size_t kSimulationChunk = std::size_t{1} << 16;

/// Draws `count` correlated (x, p) pairs at the configured operating point,
/// adds independent classical noise per channel and quantizes. The output
/// depends only on (config, count, block_index); chunks are generated in
/// parallel when hardware threads are available.
SampleBlock simulate_block(const SourceConfig& config, std::size_t count,
                           std::uint64_t block_index = 0);

enum class PsdWindow { hann, rectangular };

/// One-sided averaged periodogram per channel. Frequencies are in cycles
/// per sample (fs = 1), so bin k sits at k/segment_len and the density
/// integrates over [0, 1/2] to the block variance.
struct PsdEstimate {
  std::size_t segment_len = 0;
  std::size_t segments = 0;
  std::vector<double> psd_x;  // segment_len/2 + 1 bins, V² per unit frequency
  std::vector<double> psd_p;

  std::size_t bins() const noexcept { return psd_x.size(); }
  double bin_width() const noexcept { return 1.0 / static_cast<double>(segment_len); }
};

/// Welch estimate: block mean removed, 50% overlapping segments, window
/// power normalized. segment_len must be a power of two ≥ 2 and ≤ count.
PsdEstimate estimate_psd(const SampleBlock& block, std::size_t segment_len,
                         PsdWindow window = PsdWindow::hann);

}  // namespace qrng
