#include "qrng/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qrng/error.hpp"

#ifndef QRNG_VERSION
#define QRNG_VERSION "0.0.0"
#endif

namespace qrng::pipeline {

using nlohmann::ordered_json;

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

ordered_json digest_json(const std::optional<FileDigest>& d) {
  if (!d) return nullptr;
  return {{"path", d->path}, {"sha256", d->sha256}};
}

std::optional<FileDigest> digest_from(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return FileDigest{j.at("path").get<std::string>(), j.at("sha256").get<std::string>()};
}

ordered_json pairs_json(const std::vector<std::pair<std::string, std::string>>& kv) {
  ordered_json out = ordered_json::object();
  for (const auto& [k, v] : kv) out[k] = v;
  return out;
}

std::vector<std::pair<std::string, std::string>> pairs_from(const ordered_json& j) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : j.items()) out.emplace_back(k, v.get<std::string>());
  return out;
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  char byte[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

std::string RunManifest::to_json() const {
  ordered_json j;
  j["tool_version"] = tool_version;
  j["command"] = command;
  j["created_utc"] = created_utc;
  j["config"] = pairs_json(config);
  j["seeds"] = {{"source_seed", source_seed}, {"toeplitz_seed", digest_json(seed_file)}};
  j["extractor"] = {{"m", toeplitz_m}, {"n", toeplitz_n}, {"ratio", ratio}, {"blocks", blocks}};
  j["input"] = digest_json(input);
  ordered_json outj = digest_json(output);
  if (!outj.is_null()) outj["bit_length"] = output_bits;
  j["output"] = outj;
  if (covariance) {
    j["covariance"] = {{"var_x_v2", covariance->var_x},
                       {"var_p_v2", covariance->var_p},
                       {"covar_v2", covariance->covar},
                       {"raw_var_x_v2", covariance->raw_var_x},
                       {"raw_var_p_v2", covariance->raw_var_p},
                       {"snu_reference_x", covariance->snu_reference_x},
                       {"snu_reference_p", covariance->snu_reference_p},
                       {"sample_count", covariance->sample_count}};
  } else {
    j["covariance"] = nullptr;
  }
  if (entropy) {
    j["entropy"] = {{"h_min_bits", entropy->h_min},
                    {"s_holevo_bits", entropy->s_holevo},
                    {"lambda", entropy->lambda},
                    {"rate_bits", entropy->rate},
                    {"extraction_ratio", entropy->extraction_ratio},
                    {"adc_bits", entropy->adc_bits}};
  } else {
    j["entropy"] = nullptr;
  }
  j["conventions"] = pairs_json(conventions);
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json();
  if (!out) throw IoError("failed writing " + path.string());
}

RunManifest RunManifest::parse(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.created_utc = j.at("created_utc").get<std::string>();
    m.config = pairs_from(j.at("config"));
    m.source_seed = j.at("seeds").at("source_seed").get<std::uint64_t>();
    m.seed_file = digest_from(j.at("seeds").at("toeplitz_seed"));
    const auto& ex = j.at("extractor");
    m.toeplitz_m = ex.at("m").get<std::size_t>();
    m.toeplitz_n = ex.at("n").get<std::size_t>();
    m.ratio = ex.at("ratio").get<double>();
    m.blocks = ex.at("blocks").get<std::size_t>();
    m.input = digest_from(j.at("input"));
    m.output = digest_from(j.at("output"));
    if (m.output) m.output_bits = j.at("output").at("bit_length").get<std::size_t>();
    if (const auto& c = j.at("covariance"); !c.is_null()) {
      CovarianceEstimate cov;
      cov.var_x = c.at("var_x_v2").get<double>();
      cov.var_p = c.at("var_p_v2").get<double>();
      cov.covar = c.at("covar_v2").get<double>();
      cov.raw_var_x = c.at("raw_var_x_v2").get<double>();
      cov.raw_var_p = c.at("raw_var_p_v2").get<double>();
      cov.snu_reference_x = c.at("snu_reference_x").get<double>();
      cov.snu_reference_p = c.at("snu_reference_p").get<double>();
      cov.sample_count = c.at("sample_count").get<std::size_t>();
      m.covariance = cov;
    }
    if (const auto& e = j.at("entropy"); !e.is_null()) {
      EntropyReport r;
      r.h_min = e.at("h_min_bits").get<double>();
      r.s_holevo = e.at("s_holevo_bits").get<double>();
      r.lambda = e.at("lambda").get<double>();
      r.rate = e.at("rate_bits").get<double>();
      r.extraction_ratio = e.at("extraction_ratio").get<double>();
      r.adc_bits = e.at("adc_bits").get<int>();
      m.entropy = r;
    }
    m.conventions = pairs_from(j.at("conventions"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

std::string tool_version() { return QRNG_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace qrng::pipeline
