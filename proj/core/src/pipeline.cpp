#include "qrng/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "qrng/error.hpp"
#include "qrng/noise_model.hpp"
#include "qrng/sample_file.hpp"

namespace qrng::pipeline {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

double excess_qcnr(double raw_var, double classical_var, double step) {
  const double quantum = raw_var - classical_var - quantization_variance(step);
  if (!(quantum > 0.0) || !(classical_var > 0.0)) {
    return -std::numeric_limits<double>::infinity();
  }
  return qcnr_db(quantum, classical_var);
}

std::string csv_num(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

template <typename Fn>
auto with_context(const std::filesystem::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const CalibrationError& e) {
    throw CalibrationError(path.string() + ": " + e.what());
  } catch (const LengthError& e) {
    throw LengthError(path.string() + ": " + e.what());
  }
}

}  // namespace

double sample_variance(const std::vector<std::int32_t>& codes, double step_volts) {
  const std::size_t n = codes.size();
  if (n < 2) throw LengthError("variance needs at least 2 samples");
  double mean = 0.0;
  for (auto c : codes) mean += c;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (auto c : codes) ss += (c - mean) * (c - mean);
  return ss / static_cast<double>(n - 1) * step_volts * step_volts;
}

BitStream flatten_x_channel(const SampleBlock& block) {
  const auto bits = static_cast<unsigned>(block.adc.bits());
  BitStream out;
  out.reserve(block.size() * bits);
  for (std::int32_t code : block.codes_x) {
    out.append_bits(static_cast<std::uint64_t>(static_cast<std::uint32_t>(code)), bits);
  }
  return out;
}

SimulateSummary cmd_simulate(const PipelineConfig& cfg, const std::filesystem::path& out) {
  if (cfg.samples == 0) throw ConfigError("sample count must be positive");
  cfg.validate();
  const SampleBlock block = simulate_block(cfg.source, cfg.samples);
  write_sample_file(out, block);
  SimulateSummary s;
  s.samples = block.size();
  s.saturated = block.saturated;
  s.bytes_written = sample_file_size(block.size());
  if (block.size() >= 2) {
    s.var_x_v2 = sample_variance(block.codes_x, block.adc.step_volts());
    s.var_p_v2 = sample_variance(block.codes_p, block.adc.step_volts());
  }
  return s;
}

std::vector<CalibrationRow> calibration_sweep(const PipelineConfig& cfg, double start, double end,
                                              double step, std::size_t samples_per_point) {
  if (!(step > 0.0)) throw ConfigError("power step must be positive");
  if (!(start >= 0.0) || !(end >= start)) throw ConfigError("power range must satisfy 0 <= start <= end");
  if (samples_per_point < 2) throw ConfigError("need at least 2 samples per point");
  cfg.validate();

  const auto points = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
  std::vector<CalibrationRow> rows;
  rows.reserve(points);
  for (std::size_t i = 0; i < points; ++i) {
    SourceConfig src = cfg.source;
    src.power_mw = start + static_cast<double>(i) * step;
    src.xp_covariance = 0.0;
    const SampleBlock block = simulate_block(src, samples_per_point);
    const double d = block.adc.step_volts();
    CalibrationRow row;
    row.power_mw = src.power_mw;
    row.var_x_v2 = sample_variance(block.codes_x, d);
    row.var_p_v2 = sample_variance(block.codes_p, d);
    row.qcnr_x_db = excess_qcnr(row.var_x_v2, src.classical_var_x, d);
    row.qcnr_p_db = excess_qcnr(row.var_p_v2, src.classical_var_p, d);
    rows.push_back(row);
  }
  return rows;
}

std::string format_calibration_csv(const std::vector<CalibrationRow>& rows) {
  std::string out = "power_mw,var_x_v2,var_p_v2,qcnr_x_db,qcnr_p_db\n";
  for (const auto& r : rows) {
    out += csv_num(r.power_mw) + ',' + csv_num(r.var_x_v2) + ',' + csv_num(r.var_p_v2) + ',' +
           csv_num(r.qcnr_x_db) + ',' + csv_num(r.qcnr_p_db) + '\n';
  }
  return out;
}

std::vector<CalibrationRow> cmd_calibrate(const PipelineConfig& cfg, double start, double end,
                                          double step, std::size_t samples_per_point,
                                          const std::filesystem::path& out_csv) {
  auto rows = calibration_sweep(cfg, start, end, step, samples_per_point);
  write_text(out_csv, format_calibration_csv(rows));
  return rows;
}

EntropyOutcome analyze_capture(const SampleBlock& block, const PipelineConfig& cfg,
                               std::optional<SnuReference> reference) {
  if (!reference) reference = cfg.snu_reference;
  EntropyOutcome out;
  out.covariance = estimate_covariance(block, cfg.source.classical_var_x,
                                       cfg.source.classical_var_p, reference);
  require_quantum_signal(out.covariance);
  out.report = entropy_report(out.covariance, block.adc);
  return out;
}

SnuReference reference_from_capture(const SampleBlock& block, const PipelineConfig& cfg) {
  const auto cov =
      estimate_covariance(block, cfg.source.classical_var_x, cfg.source.classical_var_p);
  require_quantum_signal(cov);
  return {cov.var_x, cov.var_p};
}

EntropyOutcome cmd_entropy(const PipelineConfig& cfg, const std::filesystem::path& in,
                           const std::optional<std::filesystem::path>& vac_reference,
                           const std::filesystem::path& report_path) {
  std::optional<SnuReference> reference;
  if (vac_reference) {
    const SampleBlock vac = read_sample_file(*vac_reference);
    reference = with_context(*vac_reference, [&] { return reference_from_capture(vac, cfg); });
  }
  const SampleBlock block = read_sample_file(in);
  EntropyOutcome out = with_context(in, [&] { return analyze_capture(block, cfg, reference); });
  if (!report_path.empty()) write_text(report_path, format_entropy_report(out.covariance, out.report));
  return out;
}

ToeplitzSeed load_seed(const std::filesystem::path& seed_file, const PipelineConfig& cfg) {
  if (std::filesystem::exists(seed_header_path(seed_file))) return read_seed_file(seed_file);
  const auto bytes = std::filesystem::file_size(seed_file);
  const std::size_t n = cfg.block_n;
  if (bytes * 8 < n) throw GeometryError("seed file shorter than one input block");
  const std::size_t m = std::min<std::size_t>(n, bytes * 8 - n + 1);
  return read_seed_file(seed_file, m, n);
}

ExtractOutcome extract_capture(const SampleBlock& block, const ToeplitzSeed& seed,
                               const PipelineConfig& cfg) {
  ExtractOutcome out;
  if (cfg.ratio) {
    out.ratio = *cfg.ratio;
  } else {
    out.entropy = analyze_capture(block, cfg);
    if (!(out.entropy->report.rate > 0.0)) {
      throw CalibrationError("refusing extraction: extractable rate is zero");
    }
    out.ratio = out.entropy->report.extraction_ratio;
  }
  out.n = seed.cols();
  out.m = cfg.block_m ? *cfg.block_m : rows_for_ratio(out.ratio, out.n);
  if (out.m > seed.rows()) {
    throw GeometryError("geometry needs " + std::to_string(out.m) + " rows but the seed provides " +
                        std::to_string(seed.rows()));
  }
  const ToeplitzExtractor extractor(out.m == seed.rows() ? seed : seed.with_rows(out.m));
  const BitStream raw = flatten_x_channel(block);
  out.output = extractor.extract_stream(raw, out.ratio);
  out.blocks = raw.size() / out.n;

  RunManifest& mf = out.manifest;
  mf.tool_version = tool_version();
  mf.command = "extract";
  mf.created_utc = utc_timestamp();
  mf.config = cfg.snapshot();
  mf.source_seed = cfg.source.seed;
  mf.toeplitz_m = out.m;
  mf.toeplitz_n = out.n;
  mf.ratio = out.ratio;
  mf.blocks = out.blocks;
  mf.output_bits = out.output.size();
  if (out.entropy) {
    mf.covariance = out.entropy->covariance;
    mf.entropy = out.entropy->report;
  }
  mf.conventions = {
      {"bit_order", "stream bit k is bit k%8 (LSB first) of byte k/8"},
      {"sample_flattening",
       "X channel only; low " + std::to_string(block.adc.bits()) +
           " bits of each two's complement code, least significant first"},
      {"toeplitz_matrix", "T[i][j] = seed[i + n - 1 - j]"},
      {"partial_block", "trailing raw bits short of one block are dropped"},
      {"test_input", "statistical tests run on extracted output, not raw samples"},
  };
  return out;
}

ExtractOutcome cmd_extract(const PipelineConfig& cfg, const std::filesystem::path& in,
                           const std::filesystem::path& seed_file,
                           const std::filesystem::path& out) {
  cfg.validate();
  const ToeplitzSeed seed = load_seed(seed_file, cfg);
  const SampleBlock block = read_sample_file(in);
  ExtractOutcome result = with_context(in, [&] { return extract_capture(block, seed, cfg); });

  const auto bytes = result.output.to_bytes();
  {
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + out.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("failed writing " + out.string());
  }
  result.manifest.seed_file = FileDigest{seed_file.string(), sha256_file(seed_file)};
  result.manifest.input = FileDigest{in.string(), sha256_file(in)};
  result.manifest.output = FileDigest{out.string(), sha256_file(out)};
  result.manifest.write(manifest_path_for(out));
  return result;
}

BitStream read_extracted(const std::filesystem::path& in) {
  std::ifstream f(in, std::ios::binary);
  if (!f) throw IoError("cannot open " + in.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                        std::istreambuf_iterator<char>());
  std::size_t bit_length = bytes.size() * 8;
  if (const auto mf = manifest_path_for(in); std::filesystem::exists(mf)) {
    const RunManifest manifest = RunManifest::read(mf);
    if (manifest.output) bit_length = manifest.output_bits;
  }
  return BitStream::from_bytes(bytes, bit_length);
}

nist::BatteryResult cmd_test(const PipelineConfig& cfg, const std::filesystem::path& in,
                             const std::optional<std::filesystem::path>& out_report) {
  try {
    cfg.battery.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const BitStream bits = read_extracted(in);
  auto result = nist::run_battery(bits, cfg.battery);
  if (out_report) write_text(*out_report, nist::format_battery_report(result));
  return result;
}

std::string format_psd_csv(const PsdEstimate& psd) {
  std::string out = "freq_bin,psd_x,psd_p\n";
  char buf[96];
  for (std::size_t k = 0; k < psd.bins(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.9e,%.9e\n", k, psd.psd_x[k], psd.psd_p[k]);
    out += buf;
  }
  return out;
}

PsdEstimate cmd_psd(const PipelineConfig& cfg, const std::filesystem::path& in,
                    std::size_t segment_len, const std::filesystem::path& out_csv) {
  (void)cfg;
  const SampleBlock block = read_sample_file(in);
  PsdEstimate psd = with_context(in, [&] { return estimate_psd(block, segment_len); });
  write_text(out_csv, format_psd_csv(psd));
  return psd;
}

ToeplitzSeed cmd_seedgen(std::size_t m, std::size_t n, std::optional<std::uint64_t> rng_seed,
                         const std::filesystem::path& out) {
  if (n == 0 || m == 0 || m > n) throw ConfigError("seed geometry requires 1 <= m <= n");
  std::mt19937_64 engine;
  if (rng_seed) {
    engine.seed(*rng_seed);
  } else {
    std::random_device rd;
    std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
    engine.seed(seq);
  }
  BitStream bits;
  const std::size_t len = m + n - 1;
  bits.reserve(len);
  while (bits.size() + 64 <= len) bits.append_bits(engine(), 64);
  bits.append_bits(engine(), static_cast<unsigned>(len - bits.size()));
  ToeplitzSeed seed(std::move(bits), m, n);
  write_seed_file(out, seed);
  return seed;
}

}  // namespace qrng::pipeline
