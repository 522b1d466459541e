#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qseal/analysis.hpp"
#include "qseal/readers.hpp"
#include "qseal/seals.hpp"

namespace qseal {

struct SchemeConfig {
  std::string kind;  // tilted | fixed_angle | fourier | matrix
  double theta_cap = 0.3;
  double alpha = 0.25;
  double theta = 0.3;
  std::string lambda_csv;
};

struct StrategyConfig {
  std::string kind;  // partition | qpovm | projective | full_readout
  bool k_auto = true;
  std::int64_t k = 0;
  double nu = 0.5;
};

struct SweepConfig {
  std::vector<std::int64_t> n = {100, 1000, 10000};
};

struct OutputConfig {
  std::string format = "csv";
  std::string path;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  int config_version = 1;
  SchemeConfig scheme;
  StrategyConfig strategy;
  SweepConfig sweep;
  ClassifierConfig classifier;
  OutputConfig output;

  SealFamily family() const {
    if (scheme.kind == "tilted") return SealFamily::tilted(scheme.theta_cap, scheme.alpha);
    if (scheme.kind == "fixed_angle") return SealFamily::fixed_angle(scheme.theta);
    if (scheme.kind == "fourier") return SealFamily::fourier();
    throw ConfigError("matrix seals do not form an n-indexed family; use encode/attack/oracle-check");
  }

  std::unique_ptr<SealScheme> make_scheme(std::int64_t n) const {
    if (scheme.kind == "matrix") return std::make_unique<MatrixSeal>(load_matrix_seal_csv(scheme.lambda_csv));
    return family().instantiate(n);
  }

  std::int64_t resolve_k(const SealScheme& s, std::int64_t n) const {
    if (strategy.kind == "full_readout") return n;
    if (!strategy.k_auto) {
      if (strategy.k < 1 || strategy.k > n) throw ConfigError("strategy.k out of range for n=" + std::to_string(n));
      return strategy.k;
    }
    const ProductBitSeal* product = s.as_product();
    if (!product) return n;
    if (scheme.kind == "tilted") {
      std::int64_t k = ceil_int_pow(n, 2.0 * scheme.alpha);
      return std::clamp<std::int64_t>(k, 1, n);
    }
    return std::clamp<std::int64_t>(max_partition_size(*product, classifier.partition_threshold), 1, n);
  }

  MeasurementInstrument make_instrument(const SealScheme& s, std::int64_t n, std::int64_t k) const {
    if (strategy.kind == "partition") return partition_readout(static_cast<int>(n), static_cast<int>(k));
    if (strategy.kind == "full_readout") return honest_full_readout(static_cast<int>(n));
    if (strategy.kind == "qpovm") return q_povm(s.dense_dimension(), strategy.nu);
    return projective_decode(s);
  }
};

namespace config_detail {

using Json = nlohmann::json;

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& block) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + block);
}

inline double get_number(const Json& j, const std::string& key, const std::string& block, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(block + "." + key + " must be a number");
  return j.at(key).get<double>();
}

inline std::int64_t get_integer(const Json& j, const std::string& key, const std::string& block,
                                std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(block + "." + key + " must be an integer");
  return j.at(key).get<std::int64_t>();
}

inline std::string get_string(const Json& j, const std::string& key, const std::string& block,
                              const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(block + "." + key + " must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace config_detail

/// Builds a validated config from parsed JSON. Unknown keys are rejected,
/// defaults are filled, and every range check carries the field name.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using config_detail::check_keys;
  using config_detail::get_integer;
  using config_detail::get_number;
  using config_detail::get_string;

  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j, {"config_version", "scheme", "strategy", "sweep", "classifier", "output"}, "config root");

  ExperimentConfig cfg;
  cfg.config_version = static_cast<int>(get_integer(j, "config_version", "config", 1));
  if (cfg.config_version != 1) throw ConfigError("config_version must be 1");

  if (!j.contains("scheme") || !j.at("scheme").is_object()) throw ConfigError("scheme block is required");
  const auto& js = j.at("scheme");
  check_keys(js, {"kind", "theta_cap", "alpha", "theta", "lambda_csv"}, "scheme");
  cfg.scheme.kind = get_string(js, "kind", "scheme", "");
  if (cfg.scheme.kind != "tilted" && cfg.scheme.kind != "fixed_angle" && cfg.scheme.kind != "fourier" &&
      cfg.scheme.kind != "matrix")
    throw ConfigError("scheme.kind must be one of tilted, fixed_angle, fourier, matrix");
  cfg.scheme.theta_cap = get_number(js, "theta_cap", "scheme", cfg.scheme.theta_cap);
  cfg.scheme.alpha = get_number(js, "alpha", "scheme", cfg.scheme.alpha);
  cfg.scheme.theta = get_number(js, "theta", "scheme", cfg.scheme.theta);
  cfg.scheme.lambda_csv = get_string(js, "lambda_csv", "scheme", "");
  if (cfg.scheme.kind == "tilted") {
    if (cfg.scheme.theta_cap < 0.0) throw ConfigError("theta_cap must be >= 0");
    if (cfg.scheme.theta_cap >= kQuarterPi) throw ConfigError("theta_cap must be < \xCF\x80/4");
    if (!(cfg.scheme.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  }
  if (cfg.scheme.kind == "fixed_angle" && std::abs(cfg.scheme.theta) >= kQuarterPi)
    throw ConfigError("theta must satisfy |theta| < \xCF\x80/4");
  if (cfg.scheme.kind == "matrix" && cfg.scheme.lambda_csv.empty())
    throw ConfigError("scheme.lambda_csv is required for matrix seals");

  const bool product = cfg.scheme.kind == "tilted" || cfg.scheme.kind == "fixed_angle";
  cfg.strategy.kind = product ? "partition" : "projective";
  if (j.contains("strategy")) {
    const auto& jt = j.at("strategy");
    if (!jt.is_object()) throw ConfigError("strategy block must be an object");
    check_keys(jt, {"kind", "k", "nu"}, "strategy");
    cfg.strategy.kind = get_string(jt, "kind", "strategy", cfg.strategy.kind);
    if (cfg.strategy.kind != "partition" && cfg.strategy.kind != "qpovm" && cfg.strategy.kind != "projective" &&
        cfg.strategy.kind != "full_readout")
      throw ConfigError("strategy.kind must be one of partition, qpovm, projective, full_readout");
    if (jt.contains("k")) {
      if (jt.at("k").is_string()) {
        if (jt.at("k").get<std::string>() != "auto") throw ConfigError("strategy.k must be 'auto' or an integer");
        cfg.strategy.k_auto = true;
      } else if (jt.at("k").is_number_integer()) {
        cfg.strategy.k_auto = false;
        cfg.strategy.k = jt.at("k").get<std::int64_t>();
        if (cfg.strategy.k < 1) throw ConfigError("strategy.k must be >= 1");
      } else {
        throw ConfigError("strategy.k must be 'auto' or an integer");
      }
    }
    cfg.strategy.nu = get_number(jt, "nu", "strategy", cfg.strategy.nu);
    if (!(cfg.strategy.nu >= 0.0 && cfg.strategy.nu <= 1.0)) throw ConfigError("nu must be in [0,1]");
  }

  if (j.contains("sweep")) {
    const auto& jw = j.at("sweep");
    if (!jw.is_object()) throw ConfigError("sweep block must be an object");
    check_keys(jw, {"n"}, "sweep");
    if (jw.contains("n")) {
      if (!jw.at("n").is_array() || jw.at("n").empty()) throw ConfigError("sweep.n must be a non-empty array");
      cfg.sweep.n.clear();
      for (const auto& v : jw.at("n")) {
        if (!v.is_number_integer()) throw ConfigError("sweep.n entries must be integers");
        std::int64_t n = v.get<std::int64_t>();
        if (n < 1) throw ConfigError("sweep.n entries must be >= 1");
        cfg.sweep.n.push_back(n);
      }
    }
  }

  if (j.contains("classifier")) {
    const auto& jc = j.at("classifier");
    if (!jc.is_object()) throw ConfigError("classifier block must be an object");
    check_keys(jc, {"h_crit", "ratio_eps", "threshold", "trend_window", "info_ratio_min"}, "classifier");
    cfg.classifier.H_crit = get_number(jc, "h_crit", "classifier", cfg.classifier.H_crit);
    if (!(cfg.classifier.H_crit > 0.0)) throw ConfigError("h_crit must be > 0");
    cfg.classifier.ratio_eps = get_number(jc, "ratio_eps", "classifier", cfg.classifier.ratio_eps);
    if (!(cfg.classifier.ratio_eps > 0.0 && cfg.classifier.ratio_eps < 1.0))
      throw ConfigError("ratio_eps must be in (0,1)");
    cfg.classifier.partition_threshold = get_number(jc, "threshold", "classifier", cfg.classifier.partition_threshold);
    if (!(cfg.classifier.partition_threshold > 0.0 && cfg.classifier.partition_threshold < 1.0))
      throw ConfigError("threshold must be in (0,1)");
    cfg.classifier.trend_window =
        static_cast<int>(get_integer(jc, "trend_window", "classifier", cfg.classifier.trend_window));
    if (cfg.classifier.trend_window < 2) throw ConfigError("trend_window must be >= 2");
    cfg.classifier.info_ratio_min = get_number(jc, "info_ratio_min", "classifier", cfg.classifier.info_ratio_min);
    if (!(cfg.classifier.info_ratio_min >= 0.0 && cfg.classifier.info_ratio_min <= 1.0))
      throw ConfigError("info_ratio_min must be in [0,1]");
  }
  cfg.classifier.n_grid = cfg.sweep.n;

  if (j.contains("output")) {
    const auto& jo = j.at("output");
    if (!jo.is_object()) throw ConfigError("output block must be an object");
    check_keys(jo, {"format", "path", "seed"}, "output");
    cfg.output.format = get_string(jo, "format", "output", cfg.output.format);
    if (cfg.output.format != "csv" && cfg.output.format != "json")
      throw ConfigError("output.format must be csv or json");
    cfg.output.path = get_string(jo, "path", "output", "");
    std::int64_t seed = get_integer(jo, "seed", "output", static_cast<std::int64_t>(cfg.output.seed));
    if (seed < 0) throw ConfigError("output.seed must be >= 0");
    cfg.output.seed = static_cast<std::uint64_t>(seed);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t b = 0; b < std::min(text.size(), static_cast<std::size_t>(e.byte)); ++b)
      if (text[b] == '\n') ++line;
    throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace qseal
