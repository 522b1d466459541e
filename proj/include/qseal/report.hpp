#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qseal/analysis.hpp"
#include "qseal/config.hpp"
#include "qseal/verifier.hpp"

namespace qseal {

struct SweepRow {
  std::int64_t n = 0;
  std::int64_t k = 0;
  double p_bit = 0.0;
  double p_string = 0.0;
  double p_max = 0.0;
  double escape = 0.0;
  double joint = 0.0;
  double H = 0.0;
  double H_cond = 0.0;
  double ratio = 0.0;  // H_cond / H
  std::int64_t k_star = 0;
  std::string verdict = "na";
};

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ConfigError("format must be csv or json");
}

namespace report_detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void validate_row(const SweepRow& r) {
  auto prob = [](double p, const char* what) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) throw InvariantError(std::string(what) + " outside [0,1]");
  };
  prob(r.p_bit, "p_bit");
  prob(r.p_string, "p_string");
  prob(r.p_max, "p_max");
  prob(r.escape, "escape");
  prob(r.joint, "joint");
  if (r.joint > r.escape + kComputeTol) throw InvariantError("joint exceeds escape probability");
  if (r.p_string > r.p_bit + kComputeTol) throw InvariantError("p_string exceeds p_bit");
  if (r.H_cond < -kComputeTol || r.H_cond > r.H + kComputeTol) throw InvariantError("H_cond outside [0, H]");
  if (std::abs(r.ratio * r.H - r.H_cond) > 1e-9 * std::max(1.0, r.H))
    throw InvariantError("H_cond/H ratio inconsistent");
  if (r.k < 1 || r.k > r.n || r.k_star < 0 || r.k_star > r.n) throw InvariantError("partition size out of range");
}

// Number of message bits an outcome label encodes: the read prefix for
// partition layouts, the full index width for basis-aligned readouts, zero
// when labels are raw message indices without bit structure.
inline int label_bits(const MeasurementInstrument& inst) {
  if (inst.partition_layout()) return inst.partition_layout()->read_count;
  if (inst.dim() > 0 && (inst.dim() & (inst.dim() - 1)) == 0 &&
      inst.outcome_count() == static_cast<std::size_t>(inst.dim())) {
    int bits = 0;
    for (Eigen::Index d = inst.dim(); d > 1; d >>= 1) ++bits;
    return bits;
  }
  return 0;
}

struct DenseRowStats {
  double p_bit = 0.0, p_string = 0.0, p_max = 0.0, H = 0.0, H_cond = 0.0;
};

// Strategy statistics from an explicit joint table, for readouts with no
// closed form. Unread bits of a partition outcome are scored as uniform
// guesses in p_string.
inline DenseRowStats dense_row_stats(const SealScheme& scheme, const MeasurementInstrument& inst, int n_bits,
                                     int k) {
  JointDistribution jd = joint_distribution(scheme, inst);
  if (jd.form != JointDistribution::Form::Dense) {
    // leading-bits readout of a product scheme: expand the factorized form
    jd.table = expand_product_channel(jd);
    jd.form = JointDistribution::Form::Dense;
    jd.prior.assign(static_cast<std::size_t>(jd.table.rows()), 1.0 / static_cast<double>(jd.table.rows()));
    jd.label_bit_count = static_cast<int>(jd.read_flip_probs.size());
    jd.outcome_labels.resize(static_cast<std::size_t>(jd.table.cols()));
    for (std::size_t m = 0; m < jd.outcome_labels.size(); ++m) jd.outcome_labels[m] = m;
  }
  Entropies e = entropies(jd);
  DenseRowStats stats;
  stats.H = e.H;
  stats.H_cond = e.H_cond;

  const int gbits = jd.label_bit_count;
  for (Eigen::Index i = 0; i < jd.table.rows(); ++i) {
    const auto msg = static_cast<std::uint64_t>(i);
    for (Eigen::Index m = 0; m < jd.table.cols(); ++m) {
      const double p = jd.table(i, m);
      if (p <= 0.0) continue;
      const std::uint64_t label = jd.outcome_labels[static_cast<std::size_t>(m)];
      if (gbits == 0) {
        // raw index labels: only exact identification is meaningful
        if (label == msg) {
          stats.p_bit += p;
          stats.p_string += p;
          stats.p_max += p;
        }
        continue;
      }
      const std::uint64_t guess_prefix = gbits >= k ? (label >> (gbits - k)) : label;
      const std::uint64_t msg_prefix = static_cast<std::uint64_t>(msg) >> (n_bits - k);
      if (bit_at(label, 0, gbits) == bit_at(msg, 0, n_bits)) stats.p_bit += p;
      if (guess_prefix == msg_prefix) stats.p_max += p;
      if (gbits == n_bits) {
        if (label == msg) stats.p_string += p;
      } else if (guess_prefix == msg_prefix) {
        stats.p_string += p * std::pow(0.5, n_bits - gbits);
      }
    }
  }
  return stats;
}

}  // namespace report_detail

/// One row per sweep length: scheme-level readout probabilities, the
/// configured strategy's detection figures and entropies, and the family
/// verdict. Deterministic for a fixed config and seed.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  std::vector<std::int64_t> grid = cfg.sweep.n;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::string verdict = "na";
  if (cfg.scheme.kind != "matrix") {
    try {
      ClassifierConfig cc = cfg.classifier;
      cc.n_grid = cfg.sweep.n;
      verdict = classify_family(cfg.family(), cc).criterion;
    } catch (const std::invalid_argument&) {
      verdict = "na";
    }
  }

  std::vector<SweepRow> rows;
  for (std::int64_t n : grid) {
    try {
      auto scheme = cfg.make_scheme(n);
      const std::int64_t k = cfg.resolve_k(*scheme, n);
      SweepRow row;
      row.n = n;
      row.k = k;
      row.verdict = verdict;

      const ProductBitSeal* product = scheme->as_product();
      const bool leading_bits = cfg.strategy.kind == "partition" || cfg.strategy.kind == "full_readout";

      if (product && leading_bits) {
        row.p_bit = per_bit_correct_prob(*product, 0);
        row.p_string = string_correct_prob(*product);
        row.p_max = partition_correct_prob(*product, static_cast<int>(k));
        DetectionReport det = partition_detection_report(*product, static_cast<int>(k));
        row.escape = det.escape_prob;
        row.joint = det.joint_success_escape;
        row.H = static_cast<double>(n);
        for (std::int64_t i = 0; i < k; ++i) {
          double s = std::sin(product->angle(static_cast<int>(i)));
          row.H_cond += binary_entropy(s * s);
        }
        row.H_cond += static_cast<double>(n - k);
        row.k_star = max_partition_size(*product, cfg.classifier.partition_threshold);
      } else if (!product && cfg.strategy.kind == "projective") {
        if (const auto* m = dynamic_cast<const MatrixSeal*>(scheme.get())) {
          if (!m->rows_orthonormal() || m->dense_dimension() != static_cast<Eigen::Index>(m->message_count()))
            throw std::invalid_argument("seal states not orthonormal; projective decode undefined");
        }
        row.p_bit = row.p_string = row.p_max = row.escape = row.joint = 1.0;
        row.H = std::log2(static_cast<double>(scheme->message_count()));
        row.H_cond = 0.0;
        row.k_star = n;
      } else {
        // densely evaluated strategies (qpovm anywhere, leading-bits readout
        // of non-product seals, projective decode of product seals -> error)
        MeasurementInstrument inst = cfg.make_instrument(*scheme, n, k);
        int n_bits = 0;
        for (Eigen::Index d = scheme->dense_dimension(); d > 1; d >>= 1) ++n_bits;
        report_detail::DenseRowStats stats =
            report_detail::dense_row_stats(*scheme, inst, n_bits, static_cast<int>(k));
        row.p_bit = stats.p_bit;
        row.p_string = stats.p_string;
        row.p_max = stats.p_max;
        row.H = stats.H;
        row.H_cond = stats.H_cond;
        const int gbits = report_detail::label_bits(inst);
        DetectionReport det = joint_success_escape(*scheme, 0, inst, [&](std::uint64_t label) {
          if (gbits == 0) return label == 0;
          return (gbits >= k ? label >> (gbits - k) : label) == 0;
        });
        row.escape = det.escape_prob;
        row.joint = det.joint_success_escape;
        row.k_star = product ? max_partition_size(*product, cfg.classifier.partition_threshold) : n;
      }
      row.ratio = row.H > 0.0 ? row.H_cond / row.H : 0.0;
      report_detail::validate_row(row);
      rows.push_back(std::move(row));
    } catch (const InvariantError& e) {
      throw InvariantError("n=" + std::to_string(n) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("n=" + std::to_string(n) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("n=" + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

inline const char* kSweepCsvHeader = "n,k,p_bit,p_string,p_max,escape,joint,H,H_cond,H_cond_over_H,k_star,verdict";

inline std::string render_report(const std::vector<SweepRow>& rows, ReportFormat format) {
  if (rows.empty()) throw std::invalid_argument("no rows to emit");
  for (const SweepRow& r : rows) report_detail::validate_row(r);
  using report_detail::fmt;
  if (format == ReportFormat::Csv) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const SweepRow& r : rows) {
      out += std::to_string(r.n) + ',' + std::to_string(r.k) + ',' + fmt(r.p_bit) + ',' + fmt(r.p_string) + ',' +
             fmt(r.p_max) + ',' + fmt(r.escape) + ',' + fmt(r.joint) + ',' + fmt(r.H) + ',' + fmt(r.H_cond) + ',' +
             fmt(r.ratio) + ',' + std::to_string(r.k_star) + ',' + r.verdict + '\n';
    }
    return out;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const SweepRow& r : rows) {
    nlohmann::ordered_json o;
    o["n"] = r.n;
    o["k"] = r.k;
    o["p_bit"] = r.p_bit;
    o["p_string"] = r.p_string;
    o["p_max"] = r.p_max;
    o["escape"] = r.escape;
    o["joint"] = r.joint;
    o["H"] = r.H;
    o["H_cond"] = r.H_cond;
    o["H_cond_over_H"] = r.ratio;
    o["k_star"] = r.k_star;
    o["verdict"] = r.verdict;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

inline void emit_report(const std::vector<SweepRow>& rows, ReportFormat format, const std::string& path) {
  if (path.empty()) throw ConfigError("output path is empty");
  std::string text = render_report(rows, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output: " + path);
  out << text;
  if (!out) throw ConfigError("cannot write output: " + path);
}

// ---- the three-family comparison table -------------------------------------

struct Table1Row {
  std::string criterion;  // A, B or C exemplar
  std::int64_t n = 0;
  double H_cond = 0.0;
  double ratio = 0.0;
  double log_p = 0.0;  // bits identified by the exhibited partition
  double log_p_over_n = 0.0;
  double p_max = 0.0;
  std::string note;
};

/// Evaluates the three exemplar families on a grid of lengths. The exhibited
/// partition is the family's own: the largest above-threshold prefix for the
/// A and C exemplars, the ceil(n^{2 alpha})-bit prefix for the sublinear one.
inline std::vector<Table1Row> table1_demo(const std::vector<std::int64_t>& grid = {100, 1000, 10000},
                                          double threshold = 0.5) {
  struct FamilySpec {
    std::string criterion;
    SealFamily family;
    std::string note;
    bool prefix_rule;  // true: k = ceil(n^{2 alpha}); false: k = max_partition_size
  };
  const std::vector<FamilySpec> families = {
      {"A", SealFamily::tilted(0.3, 1.0), "log|P| grows linearly with n", false},
      {"B", SealFamily::tilted(0.3, 0.25), "log|P| grows sublinearly with n", true},
      {"C", SealFamily::fixed_angle(0.3), "log|P| bounded as n grows", false},
  };
  std::vector<Table1Row> rows;
  for (const FamilySpec& spec : families) {
    for (std::int64_t n : grid) {
      auto scheme = spec.family.instantiate(n);
      const ProductBitSeal* product = scheme->as_product();
      Table1Row row;
      row.criterion = spec.criterion;
      row.n = n;
      row.note = spec.note;
      for (double t : product->angles()) row.H_cond += binary_entropy(std::sin(t) * std::sin(t));
      row.ratio = row.H_cond / static_cast<double>(n);
      std::int64_t k = spec.prefix_rule
                           ? std::clamp<std::int64_t>(ceil_int_pow(n, 2.0 * spec.family.alpha()), 1, n)
                           : max_partition_size(*product, threshold);
      row.log_p = static_cast<double>(k);
      row.log_p_over_n = row.log_p / static_cast<double>(n);
      row.p_max = partition_correct_prob(*product, static_cast<int>(k));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline std::string format_table1(const std::vector<Table1Row>& rows) {
  using report_detail::fmt;
  char buf[256];
  std::string out =
      "criterion        n        H_cond    H_cond/H    log|P|   log|P|/n      p_max   note\n"
      "---------------------------------------------------------------------------------\n";
  for (const Table1Row& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-9s %8lld %12.6g %11.6g %9.6g %10.6g %10.6g   %s\n", r.criterion.c_str(),
                  static_cast<long long>(r.n), r.H_cond, r.ratio, r.log_p, r.log_p_over_n, r.p_max, r.note.c_str());
    out += buf;
  }
  return out;
}

inline std::string render_table1(const std::vector<Table1Row>& rows, ReportFormat format) {
  using report_detail::fmt;
  if (format == ReportFormat::Csv) {
    std::string out = "criterion,n,H_cond,H_cond_over_H,log_P,log_P_over_n,p_max,note\n";
    for (const Table1Row& r : rows) {
      out += r.criterion + ',' + std::to_string(r.n) + ',' + fmt(r.H_cond) + ',' + fmt(r.ratio) + ',' +
             fmt(r.log_p) + ',' + fmt(r.log_p_over_n) + ',' + fmt(r.p_max) + ',' + r.note + '\n';
    }
    return out;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Table1Row& r : rows) {
    nlohmann::ordered_json o;
    o["criterion"] = r.criterion;
    o["n"] = r.n;
    o["H_cond"] = r.H_cond;
    o["H_cond_over_H"] = r.ratio;
    o["log_P"] = r.log_p;
    o["log_P_over_n"] = r.log_p_over_n;
    o["p_max"] = r.p_max;
    o["note"] = r.note;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

}  // namespace qseal
