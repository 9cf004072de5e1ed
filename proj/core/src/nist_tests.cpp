#include "qrng/nist_tests.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "qrng/error.hpp"

namespace qrng::nist {

namespace {

void require_bits(const BitStream& bits, std::size_t minimum, LengthCheck check,
                  std::size_t hard_minimum, const char* name) {
  const std::size_t need = check == LengthCheck::enforce ? std::max(minimum, hard_minimum)
                                                         : hard_minimum;
  if (bits.size() < need) {
    throw LengthError(std::string(name) + " needs at least " + std::to_string(need) +
                      " bits, got " + std::to_string(bits.size()));
  }
}

TestResult make_result(std::string name, double p, double statistic, std::size_t consumed,
                       double alpha) {
  p = std::clamp(p, 0.0, 1.0);
  return {std::move(name), p, p >= alpha, statistic, consumed};
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Counts of the 2^m overlapping m-bit patterns (first bit most significant),
// wrapping around the end of the stream.
std::vector<std::uint64_t> pattern_counts(const BitStream& bits, std::size_t m) {
  const std::size_t n = bits.size();
  std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
  if (m == 0) {
    counts[0] = n;
    return counts;
  }
  const std::uint64_t mask = (std::uint64_t{1} << m) - 1;
  std::uint64_t window = 0;
  for (std::size_t i = 0; i < m - 1; ++i) window = (window << 1) | bits[i % n];
  std::size_t next = (m - 1) % n;
  for (std::size_t i = 0; i < n; ++i) {
    window = ((window << 1) | bits[next]) & mask;
    ++counts[window];
    if (++next == n) next = 0;
  }
  return counts;
}

// Collapse m-bit pattern counts to (m−1)-bit counts by dropping the last bit.
std::vector<std::uint64_t> drop_last_bit(const std::vector<std::uint64_t>& counts) {
  std::vector<std::uint64_t> out(counts.size() / 2, 0);
  for (std::size_t v = 0; v < counts.size(); ++v) out[v >> 1] += counts[v];
  return out;
}

long double sum_squares(const std::vector<std::uint64_t>& counts) {
  long double s = 0.0L;
  for (std::uint64_t c : counts) s += static_cast<long double>(c) * static_cast<long double>(c);
  return s;
}

// ψ²_m = 2^m/n · Σ ν² − n; zero for m = 0.
long double psi_squared(const std::vector<std::uint64_t>& counts, std::size_t m, std::size_t n) {
  if (m == 0) return 0.0L;
  return std::ldexp(sum_squares(counts), static_cast<int>(m)) / static_cast<long double>(n) -
         static_cast<long double>(n);
}

long double phi(const std::vector<std::uint64_t>& counts, std::size_t n) {
  long double s = 0.0L;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const long double p = static_cast<long double>(c) / static_cast<long double>(n);
    s += p * std::log(p);
  }
  return s;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
struct FftwPlanDeleter {
  void operator()(fftw_plan_s* plan) const { fftw_destroy_plan(plan); }
};

double cusum_p_value(long long n, long long z) {
  // Loop bounds use C integer division as in the reference implementation.
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double sum1 = 0.0;
  for (long long k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
    sum1 += normal_cdf((4.0 * k + 1) * z / sqrt_n) - normal_cdf((4.0 * k - 1) * z / sqrt_n);
  }
  double sum2 = 0.0;
  for (long long k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
    sum2 += normal_cdf((4.0 * k + 3) * z / sqrt_n) - normal_cdf((4.0 * k + 1) * z / sqrt_n);
  }
  return 1.0 - sum1 + sum2;
}

}  // namespace

std::string to_string(TestId id) {
  switch (id) {
    case TestId::monobit: return "monobit";
    case TestId::block_frequency: return "block_frequency";
    case TestId::runs: return "runs";
    case TestId::longest_run_of_ones: return "longest_run_of_ones";
    case TestId::cumulative_sums: return "cumulative_sums";
    case TestId::dft_spectral: return "dft_spectral";
    case TestId::approximate_entropy: return "approximate_entropy";
    case TestId::serial: return "serial";
  }
  return "unknown";
}

const std::vector<TestId>& all_tests() {
  static const std::vector<TestId> ids{
      TestId::monobit,          TestId::block_frequency, TestId::runs,
      TestId::longest_run_of_ones, TestId::cumulative_sums, TestId::dft_spectral,
      TestId::approximate_entropy, TestId::serial};
  return ids;
}

void BatteryConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (block_frequency_m == 0) throw DomainError("block_frequency_m must be positive");
  if (approximate_entropy_m == 0 || approximate_entropy_m > 24) {
    throw DomainError("approximate_entropy_m must lie in [1, 24]");
  }
  if (serial_m < 2 || serial_m > 24) throw DomainError("serial_m must lie in [2, 24]");
  if (dft_max_bits < 1000) throw DomainError("dft_max_bits must be at least 1000");
}

std::size_t minimum_bits(TestId id, const BatteryConfig& config) {
  switch (id) {
    case TestId::monobit: return 100;
    case TestId::block_frequency: return std::max<std::size_t>(100, config.block_frequency_m);
    case TestId::runs: return 100;
    case TestId::longest_run_of_ones: return 128;
    case TestId::cumulative_sums: return 100;
    case TestId::dft_spectral: return 1000;
    // m < floor(log2 n) − 5 and m < floor(log2 n) − 2 respectively.
    case TestId::approximate_entropy: return std::size_t{1} << (config.approximate_entropy_m + 6);
    case TestId::serial: return std::size_t{1} << (config.serial_m + 3);
  }
  return 0;
}

TestResult monobit(const BitStream& bits, double alpha, LengthCheck check) {
  require_bits(bits, 100, check, 1, "monobit");
  const auto n = static_cast<double>(bits.size());
  const double s = 2.0 * static_cast<double>(bits.count_ones()) - n;
  const double p = std::erfc(std::abs(s) / std::sqrt(2.0 * n));
  return make_result("monobit", p, s, bits.size(), alpha);
}

TestResult block_frequency(const BitStream& bits, std::size_t block_len, double alpha,
                           LengthCheck check) {
  if (block_len == 0) throw DomainError("block length must be positive");
  require_bits(bits, std::max<std::size_t>(100, block_len), check, block_len, "block_frequency");
  const std::size_t blocks = bits.size() / block_len;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const double pi = static_cast<double>(bits.count_ones(b * block_len, block_len)) /
                      static_cast<double>(block_len);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(block_len);
  const double p = igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
  return make_result("block_frequency", p, chi2, blocks * block_len, alpha);
}

TestResult runs(const BitStream& bits, double alpha, LengthCheck check) {
  require_bits(bits, 100, check, 2, "runs");
  const std::size_t n = bits.size();
  const double nd = static_cast<double>(n);
  const double pi = static_cast<double>(bits.count_ones()) / nd;
  // Frequency prerequisite: a badly biased sequence fails outright.
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nd)) {
    return make_result("runs", 0.0, 0.0, n, alpha);
  }
  // Runs = 1 + number of positions where bit i differs from bit i+1.
  std::size_t transitions = 0;
  const auto words = bits.words();
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::uint64_t next = w + 1 < words.size() ? words[w + 1] : 0;
    std::uint64_t diff = words[w] ^ ((words[w] >> 1) | (next << 63));
    const std::size_t base = 64 * w;
    if (base + 64 > n - 1) {
      const std::size_t valid = n - 1 > base ? n - 1 - base : 0;
      diff &= valid >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << valid) - 1;
    }
    transitions += static_cast<std::size_t>(std::popcount(diff));
  }
  const double v = static_cast<double>(transitions + 1);
  const double p = std::erfc(std::abs(v - 2.0 * nd * pi * (1.0 - pi)) /
                             (2.0 * std::sqrt(2.0 * nd) * pi * (1.0 - pi)));
  return make_result("runs", p, v, n, alpha);
}

TestResult longest_run_of_ones(const BitStream& bits, double alpha, LengthCheck check) {
  require_bits(bits, 128, check, 128, "longest_run_of_ones");
  const std::size_t n = bits.size();

  struct Table {
    std::size_t block;
    std::size_t low;  // runs ≤ low fall in class 0
    std::vector<double> pi;
  };
  static const Table kSmall{8, 1, {0.21484375, 0.3671875, 0.23046875, 0.1875}};
  static const Table kMedium{
      128, 4, {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847}};
  static const Table kLarge{
      10000, 10, {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727}};
  const Table& t = n < 6272 ? kSmall : (n < 750000 ? kMedium : kLarge);

  const std::size_t k = t.pi.size() - 1;
  const std::size_t blocks = n / t.block;
  std::vector<double> nu(k + 1, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t longest = 0;
    std::size_t run = 0;
    for (std::size_t i = b * t.block; i < (b + 1) * t.block; ++i) {
      if (bits[i]) {
        longest = std::max(longest, ++run);
      } else {
        run = 0;
      }
    }
    const std::size_t cls = longest <= t.low ? 0 : std::min(longest - t.low, k);
    nu[cls] += 1.0;
  }
  double chi2 = 0.0;
  const auto nb = static_cast<double>(blocks);
  for (std::size_t i = 0; i <= k; ++i) {
    chi2 += (nu[i] - nb * t.pi[i]) * (nu[i] - nb * t.pi[i]) / (nb * t.pi[i]);
  }
  const double p = igamc(static_cast<double>(k) / 2.0, chi2 / 2.0);
  return make_result("longest_run_of_ones", p, chi2, blocks * t.block, alpha);
}

std::vector<TestResult> cumulative_sums(const BitStream& bits, double alpha, LengthCheck check) {
  require_bits(bits, 100, check, 1, "cumulative_sums");
  const std::size_t n = bits.size();
  long long s = 0;
  long long max_abs = 0;
  long long lo = 0;  // extremes of the prefix sums S_0..S_{n−1}
  long long hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    s += bits[i] ? 1 : -1;
    max_abs = std::max(max_abs, s < 0 ? -s : s);
  }
  // Backward sums are S_n − S_j for j = n−1 .. 0.
  const long long back = std::max(std::abs(s - lo), std::abs(s - hi));
  const auto nn = static_cast<long long>(n);
  return {make_result("cumulative_sums_forward", cusum_p_value(nn, max_abs),
                      static_cast<double>(max_abs), n, alpha),
          make_result("cumulative_sums_backward", cusum_p_value(nn, back),
                      static_cast<double>(back), n, alpha)};
}

TestResult dft_spectral(const BitStream& bits, double alpha, LengthCheck check) {
  require_bits(bits, 1000, check, 2, "dft_spectral");
  const std::size_t n = bits.size();
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(
      fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = bits[i] ? 1.0 : -1.0;
  fftw_execute(plan.get());

  const double nd = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * nd);
  std::size_t below = 0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    if (std::hypot(out.get()[k][0], out.get()[k][1]) < threshold) ++below;
  }
  const double expected = 0.95 * nd / 2.0;
  const double d = (static_cast<double>(below) - expected) / std::sqrt(nd * 0.95 * 0.05 / 4.0);
  const double p = std::erfc(std::abs(d) / std::numbers::sqrt2);
  return make_result("dft_spectral", p, d, n, alpha);
}

TestResult approximate_entropy(const BitStream& bits, std::size_t m, double alpha,
                               LengthCheck check) {
  if (m == 0 || m > 24) throw DomainError("approximate entropy block length must lie in [1, 24]");
  require_bits(bits, std::size_t{1} << (m + 6), check, m + 1, "approximate_entropy");
  const std::size_t n = bits.size();
  const auto counts_m1 = pattern_counts(bits, m + 1);
  const auto counts_m = drop_last_bit(counts_m1);
  const long double apen = phi(counts_m, n) - phi(counts_m1, n);
  const long double chi2 =
      2.0L * static_cast<long double>(n) * (std::numbers::ln2_v<long double> - apen);
  const double p = igamc(std::ldexp(1.0, static_cast<int>(m) - 1), static_cast<double>(chi2) / 2.0);
  return make_result("approximate_entropy", p, static_cast<double>(chi2), n, alpha);
}

std::vector<TestResult> serial(const BitStream& bits, std::size_t m, double alpha,
                               LengthCheck check) {
  if (m < 2 || m > 24) throw DomainError("serial block length must lie in [2, 24]");
  require_bits(bits, std::size_t{1} << (m + 3), check, m, "serial");
  const std::size_t n = bits.size();
  const auto c_m = pattern_counts(bits, m);
  const auto c_m1 = drop_last_bit(c_m);
  const auto c_m2 = drop_last_bit(c_m1);
  const long double psi_m = psi_squared(c_m, m, n);
  const long double psi_m1 = psi_squared(c_m1, m - 1, n);
  const long double psi_m2 = psi_squared(c_m2, m - 2, n);
  const auto del1 = static_cast<double>(psi_m - psi_m1);
  const auto del2 = static_cast<double>(psi_m - 2.0L * psi_m1 + psi_m2);
  const double p1 = igamc(std::ldexp(1.0, static_cast<int>(m) - 2), del1 / 2.0);
  const double p2 = igamc(std::ldexp(1.0, static_cast<int>(m) - 3), del2 / 2.0);
  return {make_result("serial_1", p1, del1, n, alpha), make_result("serial_2", p2, del2, n, alpha)};
}

double igamc(double a, double x) {
  if (!(a > 0.0)) throw DomainError("igamc requires a > 0");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

bool BatteryResult::all_passed() const noexcept {
  return errors.empty() && !results.empty() &&
         std::all_of(results.begin(), results.end(), [](const TestResult& r) { return r.passed; });
}

BatteryResult run_battery(const BitStream& bits, const BatteryConfig& config) {
  config.validate();
  BatteryResult out;
  out.alpha = config.alpha;
  const double a = config.alpha;
  for (TestId id : config.enabled) {
    try {
      if (bits.size() < minimum_bits(id, config)) {
        throw LengthError(to_string(id) + " needs at least " +
                          std::to_string(minimum_bits(id, config)) + " bits, got " +
                          std::to_string(bits.size()));
      }
      switch (id) {
        case TestId::monobit: out.results.push_back(monobit(bits, a)); break;
        case TestId::block_frequency:
          out.results.push_back(block_frequency(bits, config.block_frequency_m, a));
          break;
        case TestId::runs: out.results.push_back(runs(bits, a)); break;
        case TestId::longest_run_of_ones: out.results.push_back(longest_run_of_ones(bits, a)); break;
        case TestId::cumulative_sums:
          for (auto& r : cumulative_sums(bits, a)) out.results.push_back(std::move(r));
          break;
        case TestId::dft_spectral:
          out.results.push_back(dft_spectral(
              bits.size() > config.dft_max_bits ? bits.slice(0, config.dft_max_bits) : bits, a));
          break;
        case TestId::approximate_entropy:
          out.results.push_back(approximate_entropy(bits, config.approximate_entropy_m, a));
          break;
        case TestId::serial:
          for (auto& r : serial(bits, config.serial_m, a)) out.results.push_back(std::move(r));
          break;
      }
    } catch (const Error& e) {
      out.errors.push_back({to_string(id), e.what()});
    }
  }
  return out;
}

std::string format_battery_report(const BatteryResult& result) {
  std::string out;
  char buf[128];
  std::size_t passed = 0;
  for (const auto& r : result.results) {
    std::snprintf(buf, sizeof buf, "%s\t%.6f\t%s\n", r.test_name.c_str(), r.p_value,
                  r.passed ? "PASS" : "FAIL");
    out += buf;
    if (r.passed) ++passed;
  }
  for (const auto& e : result.errors) out += e.test_name + "\tnan\tFAIL\n";
  const std::size_t total = result.results.size() + result.errors.size();
  std::snprintf(buf, sizeof buf, "summary\t%zu/%zu\t%s\n", passed, total,
                result.all_passed() ? "PASS" : "FAIL");
  out += buf;
  return out;
}

}  // namespace qrng::nist
