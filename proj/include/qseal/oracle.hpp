#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qseal/analysis.hpp"
#include "qseal/instrument.hpp"
#include "qseal/seals.hpp"

// Brute-force reference path. Everything here evaluates dense matrices with
// plain loops over std::vector so that it shares no evaluation shortcuts with
// the fast paths it is checking.

namespace qseal {

inline constexpr const char* kSamplerName = "mt19937_64";

struct OracleReport {
  std::string quantity;
  double fast_value = 0.0;
  double oracle_value = 0.0;
  double abs_diff = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline OracleReport make_oracle_report(std::string quantity, double fast, double oracle, double tolerance) {
  OracleReport r;
  r.quantity = std::move(quantity);
  r.fast_value = fast;
  r.oracle_value = oracle;
  r.abs_diff = std::abs(fast - oracle);
  r.tolerance = tolerance;
  r.pass = r.abs_diff <= tolerance;
  return r;
}

namespace oracle_detail {

using CVec = std::vector<Complex>;

inline CVec state_vector(const PureState& psi) {
  CVec v(static_cast<std::size_t>(psi.dim()));
  for (Eigen::Index j = 0; j < psi.dim(); ++j) v[static_cast<std::size_t>(j)] = psi.amplitudes()[j];
  return v;
}

// row-major dense copy of a Kraus operator
inline CVec materialize(const KrausOperator& op) {
  const Eigen::Index d = op.dim();
  Matrix m = op.to_dense();
  CVec out(static_cast<std::size_t>(d * d));
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) out[static_cast<std::size_t>(r * d + c)] = m(r, c);
  return out;
}

inline CVec matvec(const CVec& m, const CVec& v) {
  const std::size_t d = v.size();
  CVec out(d, Complex(0, 0));
  for (std::size_t r = 0; r < d; ++r) {
    Complex acc(0, 0);
    for (std::size_t c = 0; c < d; ++c) acc += m[r * d + c] * v[c];
    out[r] = acc;
  }
  return out;
}

inline double norm_sq(const CVec& v) {
  double acc = 0.0;
  for (const Complex& x : v) acc += std::norm(x);
  return acc;
}

inline Complex dot_conj(const CVec& a, const CVec& b) {
  Complex acc(0, 0);
  for (std::size_t j = 0; j < a.size(); ++j) acc += std::conj(a[j]) * b[j];
  return acc;
}

}  // namespace oracle_detail

/// P(message, outcome) by direct matrix-vector products, no shortcuts.
inline JointDistribution oracle_joint_distribution(const SealScheme& scheme, const MeasurementInstrument& inst,
                                                   const std::vector<double>& prior = {}) {
  const std::uint64_t n_messages = scheme.message_count();
  if (n_messages > static_cast<std::uint64_t>(kDimensionCap)) throw std::invalid_argument("dimension cap");
  if (scheme.dense_dimension() > kDimensionCap) throw std::invalid_argument("dimension cap");
  if (!prior.empty() && prior.size() != n_messages) throw std::invalid_argument("prior length mismatch");

  std::vector<oracle_detail::CVec> kraus;
  kraus.reserve(inst.outcome_count());
  for (const Outcome& o : inst.outcomes()) kraus.push_back(oracle_detail::materialize(o.op));

  JointDistribution jd;
  jd.form = JointDistribution::Form::Dense;
  jd.prior.resize(n_messages);
  for (std::uint64_t i = 0; i < n_messages; ++i)
    jd.prior[i] = prior.empty() ? 1.0 / static_cast<double>(n_messages) : prior[i];
  jd.table.resize(static_cast<Eigen::Index>(n_messages), static_cast<Eigen::Index>(inst.outcome_count()));
  for (std::uint64_t i = 0; i < n_messages; ++i) {
    oracle_detail::CVec psi = oracle_detail::state_vector(scheme.encode(i));
    for (std::size_t m = 0; m < kraus.size(); ++m) {
      double p = oracle_detail::norm_sq(oracle_detail::matvec(kraus[m], psi));
      jd.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = jd.prior[i] * p;
    }
  }
  for (const Outcome& o : inst.outcomes()) jd.outcome_labels.push_back(o.label);
  if (inst.partition_layout()) jd.label_bit_count = inst.partition_layout()->read_count;
  return jd;
}

/// sum_m |<psi|K_m|psi>|^2 by dense algebra.
inline double oracle_escape_probability(const SealScheme& scheme, std::uint64_t message,
                                        const MeasurementInstrument& inst) {
  if (scheme.dense_dimension() > kDimensionCap) throw std::invalid_argument("dimension cap");
  oracle_detail::CVec psi = oracle_detail::state_vector(scheme.encode(message));
  double total = 0.0;
  for (const Outcome& o : inst.outcomes()) {
    oracle_detail::CVec v = oracle_detail::matvec(oracle_detail::materialize(o.op), psi);
    total += std::norm(oracle_detail::dot_conj(psi, v));
  }
  return total;
}

/// Entropies recomputed from a dense table with plain loops.
inline Entropies oracle_entropies(const JointDistribution& jd) {
  if (jd.form != JointDistribution::Form::Dense) throw std::invalid_argument("oracle entropies need a dense table");
  Entropies e;
  for (double p : jd.prior)
    if (p > 0.0) e.H -= p * std::log2(p);
  for (Eigen::Index m = 0; m < jd.table.cols(); ++m) {
    double pm = 0.0;
    for (Eigen::Index i = 0; i < jd.table.rows(); ++i) pm += jd.table(i, m);
    if (pm <= 0.0) continue;
    for (Eigen::Index i = 0; i < jd.table.rows(); ++i) {
      double p = jd.table(i, m);
      if (p > 0.0) e.H_cond -= p * std::log2(p / pm);
    }
  }
  e.mutual_info = e.H - e.H_cond;
  return e;
}

/// Deterministic sampler. mt19937_64 has a pinned sequence in the standard,
/// and the unit-interval mapping below avoids the library-defined
/// distributions, so runs are bit-reproducible across toolchains.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : eng_(seed) {}
  double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

namespace oracle_detail {

inline std::size_t sample_index(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    acc += probs[m];
    if (u < acc) return m;
  }
  return probs.size() - 1;
}

inline OracleReport frequency_report(const std::string& what, const std::vector<double>& exact,
                                     const std::vector<std::int64_t>& counts, std::int64_t trials) {
  double worst_margin = -1.0;
  OracleReport r;
  bool all_pass = true;
  for (std::size_t m = 0; m < exact.size(); ++m) {
    double freq = static_cast<double>(counts[m]) / static_cast<double>(trials);
    double bound = 4.0 * std::sqrt(exact[m] * (1.0 - exact[m]) / static_cast<double>(trials)) + 1e-9;
    double diff = std::abs(freq - exact[m]);
    all_pass = all_pass && diff <= bound;
    if (diff - bound > worst_margin) {
      worst_margin = diff - bound;
      r = make_oracle_report(what + " outcome#" + std::to_string(m), freq, exact[m], bound);
    }
  }
  r.pass = all_pass;
  return r;
}

}  // namespace oracle_detail

/// Samples outcomes of an instrument on one state and checks empirical
/// frequencies against exact probabilities within 4 sigma.
inline OracleReport monte_carlo_check(const PureState& state, const MeasurementInstrument& inst,
                                      std::int64_t trials, std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("trials must be >= 1000");
  std::vector<double> exact;
  oracle_detail::CVec psi = oracle_detail::state_vector(state);
  for (const Outcome& o : inst.outcomes())
    exact.push_back(oracle_detail::norm_sq(oracle_detail::matvec(oracle_detail::materialize(o.op), psi)));

  SampleRng rng(seed);
  std::vector<std::int64_t> counts(exact.size(), 0);
  for (std::int64_t t = 0; t < trials; ++t) ++counts[oracle_detail::sample_index(exact, rng.next_unit())];
  return oracle_detail::frequency_report(std::string("monte_carlo[") + kSamplerName + ",seed=" +
                                             std::to_string(seed) + ",trials=" + std::to_string(trials) + "]",
                                         exact, counts, trials);
}

/// Same check over a scheme: each trial draws a uniform message, then an
/// outcome; empirical joint frequencies are compared cell by cell.
inline OracleReport monte_carlo_check(const SealScheme& scheme, const MeasurementInstrument& inst,
                                      std::int64_t trials, std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("trials must be >= 1000");
  JointDistribution jd = oracle_joint_distribution(scheme, inst);
  const std::size_t n_messages = jd.prior.size();
  const std::size_t n_outcomes = static_cast<std::size_t>(jd.table.cols());

  std::vector<std::vector<double>> conditional(n_messages, std::vector<double>(n_outcomes));
  std::vector<double> joint_flat(n_messages * n_outcomes);
  for (std::size_t i = 0; i < n_messages; ++i)
    for (std::size_t m = 0; m < n_outcomes; ++m) {
      double p = jd.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
      conditional[i][m] = p / jd.prior[i];
      joint_flat[i * n_outcomes + m] = p;
    }

  SampleRng rng(seed);
  std::vector<std::int64_t> counts(n_messages * n_outcomes, 0);
  for (std::int64_t t = 0; t < trials; ++t) {
    auto i = static_cast<std::size_t>(rng.next_unit() * static_cast<double>(n_messages));
    if (i >= n_messages) i = n_messages - 1;
    std::size_t m = oracle_detail::sample_index(conditional[i], rng.next_unit());
    ++counts[i * n_outcomes + m];
  }
  return oracle_detail::frequency_report(std::string("monte_carlo[") + kSamplerName + ",seed=" +
                                             std::to_string(seed) + ",trials=" + std::to_string(trials) +
                                             "] joint",
                                         joint_flat, counts, trials);
}

}  // namespace qseal
