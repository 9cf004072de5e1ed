#include "qrng/noise_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qrng/error.hpp"

namespace qrng {

AdcSpec::AdcSpec(double range_volts, int bits)
    : range_volts_(range_volts), bits_(bits), step_volts_(0.0) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw DomainError("ADC bit depth must be in [2, 24], got " + std::to_string(bits));
  }
  step_volts_ = quantization_step(range_volts, bits);
}

void ChannelNoise::validate() const {
  if (!std::isfinite(quantum_var) || quantum_var < 0.0) {
    throw DomainError("quantum variance must be finite and nonnegative");
  }
  if (!std::isfinite(classical_var) || classical_var < 0.0) {
    throw DomainError("classical variance must be finite and nonnegative");
  }
}

double quantization_step(double range_volts, int bits) {
  if (!(range_volts > 0.0) || !std::isfinite(range_volts)) {
    throw DomainError("ADC range must be positive and finite");
  }
  if (bits < 1 || bits > AdcSpec::kMaxBits) {
    throw DomainError("ADC bit depth out of bounds: " + std::to_string(bits));
  }
  return std::ldexp(2.0 * range_volts, -bits);
}

double quantization_variance(double step_volts) {
  const double q = step_volts / 12.0;
  return 2.0 * q * q;
}

double total_variance(double quantum_var, double classical_var, double step_volts) {
  ChannelNoise{quantum_var, classical_var}.validate();
  return quantum_var + classical_var + quantization_variance(step_volts);
}

double total_variance(const ChannelNoise& noise, const AdcSpec& adc) {
  return total_variance(noise.quantum_var, noise.classical_var, adc.step_volts());
}

double quadrature_variance_from_raw(double raw_var, double classical_var, double step_volts) {
  const double quantum = raw_var - classical_var - quantization_variance(step_volts);
  if (!(quantum >= 0.0)) {
    throw CalibrationError(
        "negative quadrature variance: classical plus quantization noise exceeds the measured "
        "variance (raw " + std::to_string(raw_var) + " V^2, classical " +
        std::to_string(classical_var) + " V^2)");
  }
  return quantum;
}

double quadrature_variance_from_raw(double raw_var, double classical_var, const AdcSpec& adc) {
  return quadrature_variance_from_raw(raw_var, classical_var, adc.step_volts());
}

double qcnr_db(double quantum_var, double classical_var) {
  if (!(quantum_var > 0.0) || !(classical_var > 0.0)) {
    throw DomainError("QCNR requires positive quantum and classical variances");
  }
  return 10.0 * std::log10(quantum_var / classical_var);
}

double gaussian_pdf(double volts, double total_var) {
  if (!(total_var > 0.0)) {
    throw DomainError("Gaussian density requires a positive total variance");
  }
  return std::exp(-volts * volts / (2.0 * total_var)) /
         std::sqrt(2.0 * std::numbers::pi * total_var);
}

double gaussian_pdf(double volts, const ChannelNoise& noise, const AdcSpec& adc) {
  return gaussian_pdf(volts, total_variance(noise, adc));
}

}  // namespace qrng
