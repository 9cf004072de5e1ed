#include "qrng/source_sim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "qrng/error.hpp"

namespace qrng {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t block, std::uint64_t chunk) {
  return splitmix64(splitmix64(splitmix64(seed) ^ block) ^ chunk);
}

struct Cholesky2 {
  double l11 = 0.0;
  double l21 = 0.0;
  double l22 = 0.0;
};

Cholesky2 factor(double var_x, double var_p, double covar) {
  Cholesky2 f;
  f.l11 = std::sqrt(var_x);
  f.l21 = f.l11 > 0.0 ? covar / f.l11 : 0.0;
  f.l22 = std::sqrt(std::max(var_p - f.l21 * f.l21, 0.0));
  return f;
}

void generate_chunk(const SourceConfig& config, const Cholesky2& chol, std::uint64_t block_index,
                    std::size_t chunk, std::size_t begin, std::size_t end, SampleBlock& out,
                    std::size_t& saturated) {
  std::mt19937_64 engine(chunk_seed(config.seed, block_index, chunk));
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double sx = std::sqrt(config.classical_var_x);
  const double sp = std::sqrt(config.classical_var_p);
  for (std::size_t i = begin; i < end; ++i) {
    const double z1 = normal(engine);
    const double z2 = normal(engine);
    const double e1 = normal(engine);
    const double e2 = normal(engine);
    const double x = chol.l11 * z1 + sx * e1;
    const double p = chol.l21 * z1 + chol.l22 * z2 + sp * e2;
    out.codes_x[i] = quantize_voltage(x, config.adc, saturated);
    out.codes_p[i] = quantize_voltage(p, config.adc, saturated);
  }
}

}  // namespace

std::pair<double, double> SourceConfig::quantum_variances() const {
  const double effective = std::min(std::max(power_mw, 0.0), sat_power_mw);
  return {slope_x * effective, slope_p * effective};
}

void SourceConfig::validate() const {
  if (!(sat_power_mw > 0.0)) throw DomainError("sat_power_mw must be positive");
  if (!(power_mw >= 0.0)) throw DomainError("power_mw must be nonnegative");
  if (!(slope_x >= 0.0) || !(slope_p >= 0.0)) throw DomainError("slopes must be nonnegative");
  ChannelNoise{0.0, classical_var_x}.validate();
  ChannelNoise{0.0, classical_var_p}.validate();
  const auto [vx, vp] = quantum_variances();
  // Small relative slack so a covariance at exactly the PSD boundary passes.
  if (std::abs(xp_covariance) > std::sqrt(vx * vp) * (1.0 + 1e-12)) {
    throw DomainError("xp_covariance makes the quadrature covariance matrix indefinite");
  }
}

std::pair<double, double> power_response(const SourceConfig& config, double power_mw) {
  if (!(power_mw >= 0.0)) throw DomainError("laser power must be nonnegative");
  SourceConfig at = config;
  at.power_mw = power_mw;
  const auto [qx, qp] = at.quantum_variances();
  return {qx + config.classical_var_x, qp + config.classical_var_p};
}

std::int32_t quantize_voltage(double volts, const AdcSpec& adc) {
  std::size_t ignored = 0;
  return quantize_voltage(volts, adc, ignored);
}

std::int32_t quantize_voltage(double volts, const AdcSpec& adc, std::size_t& saturated) {
  const double scaled = std::round(volts / adc.step_volts());
  if (scaled < adc.min_code()) {
    ++saturated;
    return adc.min_code();
  }
  if (scaled > adc.max_code()) {
    ++saturated;
    return adc.max_code();
  }
  return static_cast<std::int32_t>(scaled);
}

void SampleBlock::validate() const {
  if (codes_x.size() != codes_p.size()) throw FormatError("channel lengths differ");
  const auto in_range = [this](std::int32_t c) {
    return c >= adc.min_code() && c <= adc.max_code();
  };
  if (!std::all_of(codes_x.begin(), codes_x.end(), in_range) ||
      !std::all_of(codes_p.begin(), codes_p.end(), in_range)) {
    throw FormatError("sample code outside the " + std::to_string(adc.bits()) + "-bit ADC range");
  }
}

SampleBlock simulate_block(const SourceConfig& config, std::size_t count,
                           std::uint64_t block_index) {
  if (count == 0) throw DomainError("sample count must be positive");
  config.validate();

  SampleBlock out;
  out.adc = config.adc;
  out.codes_x.resize(count);
  out.codes_p.resize(count);

  const auto [vx, vp] = config.quantum_variances();
  const Cholesky2 chol = factor(vx, vp, config.xp_covariance);

  const std::size_t chunks = (count + kSimulationChunk - 1) / kSimulationChunk;
  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, chunks);
  std::vector<std::size_t> saturated(workers, 0);

  auto run = [&](std::size_t worker) {
    for (std::size_t c = worker; c < chunks; c += workers) {
      const std::size_t begin = c * kSimulationChunk;
      const std::size_t end = std::min(count, begin + kSimulationChunk);
      generate_chunk(config, chol, block_index, c, begin, end, out, saturated[worker]);
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (std::size_t s : saturated) out.saturated += s;
  return out;
}

namespace {

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* plan) const { fftw_destroy_plan(plan); }
};
struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

std::vector<double> welch(const std::vector<std::int32_t>& codes, double step,
                          std::size_t segment_len, const std::vector<double>& window,
                          std::size_t& segments) {
  const std::size_t count = codes.size();
  double mean = 0.0;
  for (std::int32_t c : codes) mean += c;
  mean /= static_cast<double>(count);

  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(segment_len));
  std::unique_ptr<fftw_complex, FftwFree> spectrum(fftw_alloc_complex(segment_len / 2 + 1));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(
      fftw_plan_dft_r2c_1d(static_cast<int>(segment_len), in.get(), spectrum.get(),
                           FFTW_ESTIMATE));

  double window_power = 0.0;
  for (double w : window) window_power += w * w;

  const std::size_t hop = segment_len / 2;
  const std::size_t bins = segment_len / 2 + 1;
  std::vector<double> psd(bins, 0.0);
  segments = 0;
  for (std::size_t start = 0; start + segment_len <= count; start += hop) {
    for (std::size_t i = 0; i < segment_len; ++i) {
      in.get()[i] = (codes[start + i] - mean) * step * window[i];
    }
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = spectrum.get()[k][0];
      const double im = spectrum.get()[k][1];
      psd[k] += re * re + im * im;
    }
    ++segments;
  }
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || k == bins - 1;
    psd[k] *= (edge ? 1.0 : 2.0) / (window_power * static_cast<double>(segments));
  }
  return psd;
}

}  // namespace

PsdEstimate estimate_psd(const SampleBlock& block, std::size_t segment_len, PsdWindow window) {
  if (segment_len < 2 || !std::has_single_bit(segment_len)) {
    throw DomainError("PSD segment length must be a power of two >= 2");
  }
  if (block.size() < segment_len) {
    throw LengthError("PSD segment length " + std::to_string(segment_len) +
                      " exceeds the sample count " + std::to_string(block.size()));
  }

  std::vector<double> taper(segment_len, 1.0);
  if (window == PsdWindow::hann) {
    for (std::size_t i = 0; i < segment_len; ++i) {
      taper[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(segment_len));
    }
  }

  PsdEstimate out;
  out.segment_len = segment_len;
  const double step = block.adc.step_volts();
  out.psd_x = welch(block.codes_x, step, segment_len, taper, out.segments);
  out.psd_p = welch(block.codes_p, step, segment_len, taper, out.segments);
  return out;
}

}  // namespace qrng
