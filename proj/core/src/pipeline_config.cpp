#include "qrng/pipeline_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "qrng/error.hpp"

namespace qrng::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
  // strtod rather than from_chars: libstdc++ 11 lacks floating from_chars.
  const std::string text(value);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ConfigError("invalid number for '" + std::string(key) + "': '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError("invalid unsigned integer for '" + std::string(key) + "': '" +
                      std::string(value) + "'");
  }
  return v;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<nist::TestId> parse_tests(std::string_view value) {
  std::vector<nist::TestId> out;
  std::stringstream ss{std::string(value)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto name = trim(item);
    if (name.empty()) continue;
    bool found = false;
    for (auto id : nist::all_tests()) {
      if (nist::to_string(id) == name) {
        out.push_back(id);
        found = true;
      }
    }
    if (!found) throw ConfigError("unknown test '" + std::string(name) + "'");
  }
  if (out.empty()) throw ConfigError("tests list is empty");
  return out;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  SourceConfig& s = source;
  if (key == "power_mw") s.power_mw = to_double(key, value);
  else if (key == "slope_x") s.slope_x = to_double(key, value);
  else if (key == "slope_p") s.slope_p = to_double(key, value);
  else if (key == "sat_power_mw") s.sat_power_mw = to_double(key, value);
  else if (key == "classical_var_x") s.classical_var_x = to_double(key, value);
  else if (key == "classical_var_p") s.classical_var_p = to_double(key, value);
  else if (key == "xp_covariance") s.xp_covariance = to_double(key, value);
  else if (key == "adc_range_volts") {
    try {
      s.adc = AdcSpec(to_double(key, value), s.adc.bits());
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "adc_bits") {
    try {
      s.adc = AdcSpec(s.adc.range_volts(), static_cast<int>(to_uint(key, value)));
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "seed") s.seed = to_uint(key, value);
  else if (key == "samples") samples = to_uint(key, value);
  else if (key == "block_n") block_n = to_uint(key, value);
  else if (key == "block_m") {
    if (value == "auto") block_m.reset();
    else block_m = to_uint(key, value);
  } else if (key == "ratio") {
    if (value == "auto") ratio.reset();
    else ratio = to_double(key, value);
  } else if (key == "snu_reference_x" || key == "snu_reference_p") {
    if (value == "auto") {
      snu_reference.reset();
    } else {
      SnuReference ref = snu_reference.value_or(SnuReference{});
      (key == "snu_reference_x" ? ref.x : ref.p) = to_double(key, value);
      snu_reference = ref;
    }
  } else if (key == "alpha") battery.alpha = to_double(key, value);
  else if (key == "tests") battery.enabled = parse_tests(value);
  else if (key == "block_frequency_m") battery.block_frequency_m = to_uint(key, value);
  else if (key == "approximate_entropy_m") battery.approximate_entropy_m = to_uint(key, value);
  else if (key == "serial_m") battery.serial_m = to_uint(key, value);
  else if (key == "dft_max_bits") battery.dft_max_bits = to_uint(key, value);
  else if (key == "psd_segment") psd_segment = to_uint(key, value);
  else if (key == "in") in = std::string(value);
  else if (key == "out") out = std::string(value);
  else if (key == "seed_file") seed_file = std::string(value);
  else if (key == "vac_reference") vac_reference = std::string(value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::validate() const {
  try {
    source.validate();
    battery.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (block_n == 0) throw ConfigError("block_n must be positive");
  if (block_m && (*block_m == 0 || *block_m > block_n)) {
    throw ConfigError("block_m must lie in [1, block_n]");
  }
  if (ratio && !(*ratio > 0.0 && *ratio <= 1.0)) throw ConfigError("ratio must lie in (0, 1]");
  if (snu_reference && (!(snu_reference->x > 0.0) || !(snu_reference->p > 0.0))) {
    throw ConfigError("snu_reference_x and snu_reference_p must both be set and positive");
  }
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::snapshot() const {
  std::vector<std::pair<std::string, std::string>> kv{
      {"power_mw", num(source.power_mw)},
      {"slope_x", num(source.slope_x)},
      {"slope_p", num(source.slope_p)},
      {"sat_power_mw", num(source.sat_power_mw)},
      {"classical_var_x", num(source.classical_var_x)},
      {"classical_var_p", num(source.classical_var_p)},
      {"xp_covariance", num(source.xp_covariance)},
      {"adc_range_volts", num(source.adc.range_volts())},
      {"adc_bits", std::to_string(source.adc.bits())},
      {"seed", std::to_string(source.seed)},
      {"samples", std::to_string(samples)},
      {"block_n", std::to_string(block_n)},
      {"block_m", block_m ? std::to_string(*block_m) : "auto"},
      {"ratio", ratio ? num(*ratio) : "auto"},
      {"snu_reference_x", snu_reference ? num(snu_reference->x) : "auto"},
      {"snu_reference_p", snu_reference ? num(snu_reference->p) : "auto"},
      {"alpha", num(battery.alpha)},
  };
  std::string tests;
  for (auto id : battery.enabled) {
    if (!tests.empty()) tests += ',';
    tests += nist::to_string(id);
  }
  kv.emplace_back("tests", tests);
  kv.emplace_back("block_frequency_m", std::to_string(battery.block_frequency_m));
  kv.emplace_back("approximate_entropy_m", std::to_string(battery.approximate_entropy_m));
  kv.emplace_back("serial_m", std::to_string(battery.serial_m));
  kv.emplace_back("dft_max_bits", std::to_string(battery.dft_max_bits));
  kv.emplace_back("psd_segment", std::to_string(psd_segment));
  return kv;
}

PipelineConfig PipelineConfig::parse(std::istream& in, std::string_view source_name) {
  PipelineConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    const std::string where = std::string(source_name) + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key=value");
    try {
      cfg.set(trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in, path.string());
}

}  // namespace qrng::pipeline
