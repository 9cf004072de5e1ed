#include "qrng/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "qrng/error.hpp"

namespace qrng {

namespace {

constexpr double kLambdaTolerance = 1e-9;

// x·log2(x), continuous at zero.
double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

double CovarianceEstimate::var_x_snu() const { return snu_normalize(raw_var_x, snu_reference_x); }
double CovarianceEstimate::var_p_snu() const { return snu_normalize(raw_var_p, snu_reference_p); }
double CovarianceEstimate::covar_snu() const {
  if (!(snu_reference_x > 0.0) || !(snu_reference_p > 0.0)) {
    throw DomainError("shot-noise reference must be positive");
  }
  return covar / std::sqrt(snu_reference_x * snu_reference_p);
}

CovarianceEstimate estimate_covariance(const SampleBlock& block, double classical_var_x,
                                       double classical_var_p,
                                       std::optional<SnuReference> reference) {
  const std::size_t n = block.size();
  if (n < 2) throw LengthError("covariance estimate needs at least 2 samples");
  if (block.codes_p.size() != n) throw FormatError("channel lengths differ");

  // Two passes over integer codes; scale to volts at the end.
  double mean_x = 0.0;
  double mean_p = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += block.codes_x[i];
    mean_p += block.codes_p[i];
  }
  mean_x /= static_cast<double>(n);
  mean_p /= static_cast<double>(n);

  double sxx = 0.0;
  double spp = 0.0;
  double sxp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = block.codes_x[i] - mean_x;
    const double dp = block.codes_p[i] - mean_p;
    sxx += dx * dx;
    spp += dp * dp;
    sxp += dx * dp;
  }
  const double step = block.adc.step_volts();
  const double scale = step * step / static_cast<double>(n - 1);

  CovarianceEstimate cov;
  cov.sample_count = n;
  cov.raw_var_x = sxx * scale;
  cov.raw_var_p = spp * scale;
  cov.covar = sxp * scale;
  if (!(cov.raw_var_x > 0.0) || !(cov.raw_var_p > 0.0)) {
    throw CalibrationError("no quantum signal: capture has zero variance");
  }
  try {
    cov.var_x = quadrature_variance_from_raw(cov.raw_var_x, classical_var_x, step);
    cov.var_p = quadrature_variance_from_raw(cov.raw_var_p, classical_var_p, step);
  } catch (const CalibrationError& e) {
    throw CalibrationError(std::string("no quantum signal: ") + e.what());
  }
  if (!(cov.var_x > 0.0) || !(cov.var_p > 0.0)) {
    throw CalibrationError("no quantum signal: quadrature variance is zero");
  }
  const SnuReference ref = reference.value_or(SnuReference{cov.var_x, cov.var_p});
  if (!(ref.x > 0.0) || !(ref.p > 0.0)) {
    throw DomainError("shot-noise reference must be positive");
  }
  cov.snu_reference_x = ref.x;
  cov.snu_reference_p = ref.p;
  return cov;
}

void require_quantum_signal(const CovarianceEstimate& cov, double z) {
  const double rel_se = std::sqrt(2.0 / static_cast<double>(cov.sample_count - 1));
  if (cov.var_x <= z * rel_se * cov.raw_var_x || cov.var_p <= z * rel_se * cov.raw_var_p) {
    throw CalibrationError(
        "no quantum signal: quadrature variance is not significantly above the classical noise "
        "floor");
  }
}

double snu_normalize(double raw_var, double reference) {
  if (!(reference > 0.0)) throw DomainError("shot-noise reference must be positive");
  return raw_var / reference;
}

double precise_erf(double x) {
  const double ax = std::abs(x);
  if (ax >= 0.125) return std::erf(x);
  // Alternating series, terms fall by ≥ x²/(k+1) so 12 terms reach 1e-17.
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int k = 1; k < 14; ++k) {
    term *= -x2 / k;
    sum += term / (2 * k + 1);
  }
  return sum * 2.0 / std::sqrt(std::numbers::pi);
}

double central_bin_probability(double var_x, double step_volts) {
  if (!(var_x > 0.0) || !(step_volts > 0.0)) {
    throw DomainError("min-entropy requires positive variance and step");
  }
  return precise_erf(step_volts / (2.0 * std::sqrt(2.0 * var_x)));
}

double min_entropy_bits(double var_x, double step_volts) {
  if (!(var_x > 0.0) || !(step_volts > 0.0)) {
    throw DomainError("min-entropy requires positive variance and step");
  }
  const double arg = step_volts / (2.0 * std::sqrt(2.0 * var_x));
  // Near erf = 1 work from the complement to keep relative precision.
  if (arg > 1.0) return -std::log1p(-std::erfc(arg)) / std::numbers::ln2;
  return -std::log2(precise_erf(arg));
}

double min_entropy_bits(double var_x, const AdcSpec& adc) {
  return min_entropy_bits(var_x, adc.step_volts());
}

HolevoBound holevo_entropy_from_lambda(double lambda) {
  if (!std::isfinite(lambda)) throw DomainError("symplectic eigenvalue must be finite");
  if (lambda < 1.0 - kLambdaTolerance) {
    throw CalibrationError("unphysical state: symplectic eigenvalue " + std::to_string(lambda) +
                           " < 1, check the shot-noise calibration");
  }
  if (lambda < 1.0) lambda = 1.0;
  const double up = (lambda + 1.0) / 2.0;
  const double down = (lambda - 1.0) / 2.0;
  return {lambda, xlog2x(up) - xlog2x(down)};
}

double symplectic_lambda(double var_x_snu, double var_p_snu, double covar_snu) {
  const double det = var_x_snu * var_p_snu - covar_snu * covar_snu;
  if (!(det >= 0.0)) {
    throw CalibrationError("covariance matrix has negative determinant");
  }
  return std::sqrt(det);
}

HolevoBound holevo_entropy(const CovarianceEstimate& cov, CovarianceMode mode) {
  const double c = mode == CovarianceMode::measured ? cov.covar_snu() : 0.0;
  return holevo_entropy_from_lambda(symplectic_lambda(cov.var_x_snu(), cov.var_p_snu(), c));
}

EntropyReport extractable_rate(double h_min, double s_bits, int adc_bits) {
  if (!(h_min >= 0.0) || !(s_bits >= 0.0)) {
    throw DomainError("entropies must be nonnegative");
  }
  if (adc_bits <= 0) throw DomainError("ADC bit count must be positive");
  EntropyReport r;
  r.h_min = h_min;
  r.s_holevo = s_bits;
  r.adc_bits = adc_bits;
  r.rate = std::max(h_min - s_bits, 0.0);
  r.extraction_ratio = std::min(r.rate / adc_bits, 1.0);
  return r;
}

EntropyReport entropy_report(const CovarianceEstimate& cov, const AdcSpec& adc,
                             CovarianceMode mode) {
  const double h = min_entropy_bits(cov.var_x, adc);
  const HolevoBound bound = holevo_entropy(cov, mode);
  EntropyReport r = extractable_rate(h, bound.s_bits, adc.bits());
  r.lambda = bound.lambda;
  return r;
}

std::string format_entropy_report(const CovarianceEstimate& cov, const EntropyReport& report) {
  std::string out;
  const auto line = [&out](const char* key, const std::string& value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  line("var_x_v2", fmt("%.6e", cov.var_x));
  line("var_p_v2", fmt("%.6e", cov.var_p));
  line("covar_v2", fmt("%.6e", cov.covar));
  line("var_x_snu", fmt("%.6f", cov.var_x_snu()));
  line("var_p_snu", fmt("%.6f", cov.var_p_snu()));
  line("lambda", fmt("%.6f", report.lambda));
  line("h_min_bits", fmt("%.6f", report.h_min));
  line("s_holevo_bits", fmt("%.6f", report.s_holevo));
  line("rate_bits", fmt("%.6f", report.rate));
  line("extraction_ratio", fmt("%.6f", report.extraction_ratio));
  line("sample_count", std::to_string(cov.sample_count));
  return out;
}

}  // namespace qrng
