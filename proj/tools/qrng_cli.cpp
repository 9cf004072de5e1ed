// qrng: simulate, calibrate, analyze, extract and test vacuum-noise captures.
//
// Exit codes: 0 success, 1 usage/config, 2 data/calibration, 3 I/O.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <list>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qrng/error.hpp"
#include "qrng/pipeline.hpp"
#include "qrng/pipeline_config.hpp"
#include "qrng/sample_file.hpp"

namespace {

namespace fs = std::filesystem;
using qrng::pipeline::PipelineConfig;
namespace pipeline = qrng::pipeline;

// Flags are collected as text and applied through PipelineConfig::set so a
// flag and the matching config key share one parser.
struct Overrides {
  // std::list keeps slot addresses stable while CLI11 holds them.
  std::list<std::pair<std::string, std::optional<std::string>>> keys;

  std::optional<std::string>& slot(const std::string& key) {
    keys.emplace_back(key, std::nullopt);
    return keys.back().second;
  }
};

struct Options {
  std::optional<std::string> config_path;
  std::string in;
  std::string out;
  std::string seed_file;
  std::string vac_reference;
  double power_start = 0.0;
  double power_end = 12.0;
  double power_step = 0.5;
  std::size_t seed_m = 0;
  std::size_t seed_n = 4096;
  std::optional<std::uint64_t> seedgen_seed;
  std::optional<std::size_t> segment;
  bool quiet = false;
};

PipelineConfig build_config(const Options& opt, const Overrides& ov) {
  PipelineConfig cfg = opt.config_path ? PipelineConfig::load(*opt.config_path) : PipelineConfig{};
  for (const auto& [key, value] : ov.keys) {
    if (value) cfg.set(key, *value);
  }
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "key=value config file; flags override it");
  cmd->add_flag("-q,--quiet", opt.quiet, "suppress the summary on stdout");
}

void add_source_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--power-mw", ov.slot("power_mw"), "laser power (mW)");
  cmd->add_option("--seed", ov.slot("seed"), "simulation seed");
  cmd->add_option("--adc-bits", ov.slot("adc_bits"), "ADC resolution");
  cmd->add_option("--adc-range", ov.slot("adc_range_volts"), "ADC input range ±R (V)");
  cmd->add_option("--covariance", ov.slot("xp_covariance"), "X/P quantum covariance (V^2)");
}

void add_classical_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--classical-x", ov.slot("classical_var_x"), "classical noise variance of X (V^2)");
  cmd->add_option("--classical-p", ov.slot("classical_var_p"), "classical noise variance of P (V^2)");
}

void add_reference_flags(CLI::App* cmd, Options& opt, Overrides& ov) {
  cmd->add_option("--vac-reference", opt.vac_reference, "vacuum calibration capture (QRNS)");
  cmd->add_option("--ref-x", ov.slot("snu_reference_x"), "shot-noise reference variance of X (V^2)");
  cmd->add_option("--ref-p", ov.slot("snu_reference_p"), "shot-noise reference variance of P (V^2)");
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

int run(int argc, char** argv) {
  CLI::App app{"Vacuum-noise QRNG pipeline", "qrng"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pipeline::tool_version());

  Options opt;
  Overrides ov;

  auto* simulate = app.add_subcommand("simulate", "simulate a dual-quadrature capture");
  add_common(simulate, opt);
  add_source_flags(simulate, ov);
  simulate->add_option("--samples", ov.slot("samples"), "sample pairs to draw");
  simulate->add_option("--out", opt.out, "output QRNS file")->required();

  auto* calibrate = app.add_subcommand("calibrate", "sweep laser power and record variances");
  add_common(calibrate, opt);
  add_source_flags(calibrate, ov);
  calibrate->add_option("--power-start", opt.power_start, "first power (mW)");
  calibrate->add_option("--power-end", opt.power_end, "last power (mW)");
  calibrate->add_option("--power-step", opt.power_step, "power increment (mW)");
  calibrate->add_option("--samples", ov.slot("samples"), "samples per power point");
  calibrate->add_option("--out", opt.out, "output CSV")->required();

  auto* entropy = app.add_subcommand("entropy", "min-entropy, Holevo bound and extractable rate");
  add_common(entropy, opt);
  add_classical_flags(entropy, ov);
  add_reference_flags(entropy, opt, ov);
  entropy->add_option("--in", opt.in, "input QRNS capture")->required();
  entropy->add_option("--out", opt.out, "report file (key=value)");

  auto* extract = app.add_subcommand("extract", "Toeplitz-hash the X channel");
  add_common(extract, opt);
  add_classical_flags(extract, ov);
  add_reference_flags(extract, opt, ov);
  extract->add_option("--in", opt.in, "input QRNS capture")->required();
  extract->add_option("--seed-file", opt.seed_file, "Toeplitz seed file")->required();
  extract->add_option("--ratio", ov.slot("ratio"), "output/input ratio or 'auto'");
  extract->add_option("--block-n", ov.slot("block_n"), "input block length when the seed has no header");
  extract->add_option("--block-m", ov.slot("block_m"), "output rows per block or 'auto'");
  extract->add_option("--out", opt.out, "output bytes; a manifest is written next to it")->required();

  auto* test = app.add_subcommand("test", "run the statistical test battery");
  add_common(test, opt);
  test->add_option("--in", opt.in, "extracted stream")->required();
  test->add_option("--alpha", ov.slot("alpha"), "significance level");
  test->add_option("--tests", ov.slot("tests"), "comma-separated subset of tests");
  test->add_option("--out", opt.out, "report file");

  auto* psd = app.add_subcommand("psd", "Welch power spectral density of a capture");
  add_common(psd, opt);
  psd->add_option("--in", opt.in, "input QRNS capture")->required();
  psd->add_option("--segment", opt.segment, "segment length (power of two)");
  psd->add_option("--out", opt.out, "output CSV")->required();

  auto* seedgen = app.add_subcommand("seedgen", "write a random Toeplitz seed");
  seedgen->add_option("--m", opt.seed_m, "rows")->required();
  seedgen->add_option("--n", opt.seed_n, "columns (input block length)");
  seedgen->add_option("--seed", opt.seedgen_seed, "generator seed; OS entropy when omitted");
  seedgen->add_option("--out", opt.out, "seed file; header written to <out>.hdr")->required();
  seedgen->add_flag("-q,--quiet", opt.quiet, "suppress the summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::ostream& log = std::cout;

  if (seedgen->parsed()) {
    const auto seed = pipeline::cmd_seedgen(opt.seed_m, opt.seed_n, opt.seedgen_seed, opt.out);
    if (!opt.quiet) log << "seed m=" << seed.rows() << " n=" << seed.cols() << " -> " << opt.out << '\n';
    return 0;
  }

  const PipelineConfig cfg = build_config(opt, ov);

  if (simulate->parsed()) {
    const auto s = pipeline::cmd_simulate(cfg, opt.out);
    if (!opt.quiet) {
      std::printf("samples=%zu\nvar_x_v2=%.6e\nvar_p_v2=%.6e\nsaturated=%zu\nbytes=%llu\n", s.samples,
                  s.var_x_v2, s.var_p_v2, s.saturated, static_cast<unsigned long long>(s.bytes_written));
    }
  } else if (calibrate->parsed()) {
    const auto rows =
        pipeline::cmd_calibrate(cfg, opt.power_start, opt.power_end, opt.power_step, cfg.samples, opt.out);
    if (!opt.quiet) log << pipeline::format_calibration_csv(rows);
  } else if (entropy->parsed()) {
    const auto r = pipeline::cmd_entropy(cfg, opt.in, optional_path(opt.vac_reference), opt.out);
    if (!opt.quiet) log << qrng::format_entropy_report(r.covariance, r.report);
  } else if (extract->parsed()) {
    PipelineConfig c = cfg;
    if (!opt.vac_reference.empty()) {
      c.snu_reference = pipeline::reference_from_capture(qrng::read_sample_file(opt.vac_reference), c);
    }
    const auto r = pipeline::cmd_extract(c, opt.in, opt.seed_file, opt.out);
    if (!opt.quiet) {
      std::printf("ratio=%.6f\nm=%zu\nn=%zu\nblocks=%zu\noutput_bits=%zu\nmanifest=%s\n", r.ratio, r.m,
                  r.n, r.blocks, r.output.size(), pipeline::manifest_path_for(opt.out).c_str());
    }
  } else if (test->parsed()) {
    const auto r = pipeline::cmd_test(cfg, opt.in, optional_path(opt.out));
    if (!opt.quiet) log << qrng::nist::format_battery_report(r);
    // A failing battery is a data outcome, not a tool failure.
    return r.all_passed() ? 0 : 2;
  } else if (psd->parsed()) {
    const auto r = pipeline::cmd_psd(cfg, opt.in, opt.segment.value_or(cfg.psd_segment), opt.out);
    if (!opt.quiet) log << "segments=" << r.segments << " bins=" << r.bins() << " -> " << opt.out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qrng::Error& e) {
    std::cerr << "qrng: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "qrng: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "qrng: internal error: " << e.what() << '\n';
    return 2;
  }
}
