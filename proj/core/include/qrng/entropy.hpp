#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "qrng/noise_model.hpp"
#include "qrng/source_sim.hpp"

namespace qrng {

/// Vacuum-only quadrature variances (V²) that define one shot-noise unit
/// per channel.
struct SnuReference {
  double x = 0.0;
  double p = 0.0;
};

/// Sample covariance of a dual-quadrature capture.
///
/// raw_* are the unbiased sample statistics of the reconstructed voltages;
/// var_x/var_p are the quadrature variances left after removing classical
/// and quantization noise. Shot-noise-unit values divide the raw variances
/// by the per-channel reference.
struct CovarianceEstimate {
  double raw_var_x = 0.0;  // V²
  double raw_var_p = 0.0;
  double var_x = 0.0;  // quadrature, V²
  double var_p = 0.0;
  double covar = 0.0;  // X/P covariance, V²
  std::size_t sample_count = 0;
  double snu_reference_x = 0.0;
  double snu_reference_p = 0.0;

  double var_x_snu() const;
  double var_p_snu() const;
  double covar_snu() const;
};

/// Estimates the X/P covariance matrix of `block`. Without `reference`, each
/// channel is normalized by its own quadrature variance.
/// Throws LengthError for fewer than 2 samples and CalibrationError when a
/// quadrature variance is not positive.
CovarianceEstimate estimate_covariance(const SampleBlock& block, double classical_var_x,
                                       double classical_var_p,
                                       std::optional<SnuReference> reference = std::nullopt);

/// Throws CalibrationError("no quantum signal") unless both quadrature
/// variances exceed `z` standard errors of the raw variance estimate. Laser-off
/// captures fail this check even when sampling noise makes var_x slightly
/// positive.
void require_quantum_signal(const CovarianceEstimate& cov, double z = 5.0);

/// raw_var / reference. Throws DomainError for a nonpositive reference.
double snu_normalize(double raw_var, double reference);

/// erf with a Maclaurin-series branch for small arguments.
double precise_erf(double x);

/// Probability that a zero-mean Gaussian lands in the central ADC bin
/// [−δ/2, δ/2], i.e. erf(δ / (2√(2σ²))).
double central_bin_probability(double var_x, double step_volts);

/// Min-entropy per sample, −log2 erf(δ / (2√(2σ²))), in bits.
double min_entropy_bits(double var_x, double step_volts);
double min_entropy_bits(double var_x, const AdcSpec& adc);

struct HolevoBound {
  double lambda = 1.0;  // symplectic eigenvalue in shot-noise units
  double s_bits = 0.0;
};

/// Entropy of a thermal state with symplectic eigenvalue λ:
/// ((λ+1)/2)log2((λ+1)/2) − ((λ−1)/2)log2((λ−1)/2). λ within 1e-9 below
/// one is treated as one; smaller values throw CalibrationError.
HolevoBound holevo_entropy_from_lambda(double lambda);

/// λ = √(σ²_x σ²_p − c²) in shot-noise units.
double symplectic_lambda(double var_x_snu, double var_p_snu, double covar_snu);

enum class CovarianceMode {
  assume_zero,  // upper bound with c = 0
  measured,
};

HolevoBound holevo_entropy(const CovarianceEstimate& cov,
                           CovarianceMode mode = CovarianceMode::assume_zero);

struct EntropyReport {
  double h_min = 0.0;
  double s_holevo = 0.0;
  double lambda = 1.0;
  double rate = 0.0;              // bits per sample
  double extraction_ratio = 0.0;  // rate / adc_bits
  int adc_bits = 0;
};

/// rate = max(h_min − s, 0); ratio = rate/adc_bits.
EntropyReport extractable_rate(double h_min, double s_bits, int adc_bits);

/// Full chain: H_min from var_x, Holevo bound from the normalized
/// covariance matrix, then the extractable rate.
EntropyReport entropy_report(const CovarianceEstimate& cov, const AdcSpec& adc,
                             CovarianceMode mode = CovarianceMode::assume_zero);

/// key=value report, one per line, keys in fixed order:
/// var_x_v2 var_p_v2 covar_v2 var_x_snu var_p_snu lambda h_min_bits
/// s_holevo_bits rate_bits extraction_ratio sample_count
std::string format_entropy_report(const CovarianceEstimate& cov, const EntropyReport& report);

}  // namespace qrng
