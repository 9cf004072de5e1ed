#pragma once

#include <cstdint>

namespace qrng {

/// Digitizer description: input range ±range_volts sampled at `bits` bits.
/// The quantization step is 2·range/2^bits.
class AdcSpec {
 public:
  static constexpr int kMinBits = 2;
  static constexpr int kMaxBits = 24;

  /// Throws DomainError unless range_volts > 0 and bits in [2, 24].
  AdcSpec(double range_volts, int bits);

  double range_volts() const noexcept { return range_volts_; }
  int bits() const noexcept { return bits_; }
  double step_volts() const noexcept { return step_volts_; }

  std::int32_t min_code() const noexcept { return -(std::int32_t{1} << (bits_ - 1)); }
  std::int32_t max_code() const noexcept { return (std::int32_t{1} << (bits_ - 1)) - 1; }

  friend bool operator==(const AdcSpec&, const AdcSpec&) = default;

 private:
  double range_volts_;
  int bits_;
  double step_volts_;
};

/// Per-detector variance composition in V²: the quantum (vacuum) part and
/// the classical electronic part.
struct ChannelNoise {
  double quantum_var = 0.0;
  double classical_var = 0.0;

  /// Throws DomainError if either variance is negative or non-finite.
  void validate() const;
};

/// 2·range/2^bits. Accepts bits in [1, 24] since the arithmetic is defined
/// there; AdcSpec itself requires at least 2 bits.
double quantization_step(double range_volts, int bits);

/// Quantization contribution to the detector variance, 2(δ/12)².
double quantization_variance(double step_volts);

/// σ²_Q + σ²_E + 2(δ/12)².
double total_variance(double quantum_var, double classical_var, double step_volts);
double total_variance(const ChannelNoise& noise, const AdcSpec& adc);

/// Inverts total_variance: raw − classical − 2(δ/12)².
/// Throws CalibrationError when the result would be negative.
double quadrature_variance_from_raw(double raw_var, double classical_var, double step_volts);
double quadrature_variance_from_raw(double raw_var, double classical_var, const AdcSpec& adc);

/// Quantum-to-classical noise ratio, 10·log10(quantum/classical) in dB.
double qcnr_db(double quantum_var, double classical_var);

/// Zero-mean Gaussian density with the given total variance (V²).
double gaussian_pdf(double volts, double total_var);
/// Detector voltage density with variance total_variance(noise, adc).
double gaussian_pdf(double volts, const ChannelNoise& noise, const AdcSpec& adc);

}  // namespace qrng
