#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qseal/readers.hpp"
#include "qseal/seals.hpp"
#include "qseal/state.hpp"

namespace qseal {

/// Binary entropy in bits; h(0) = h(1) = 0.
inline double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability out of range");
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

/// ceil(n^p), tolerating floating-point slop just below an integer.
inline std::int64_t ceil_int_pow(std::int64_t n, double p) {
  double x = std::pow(static_cast<double>(n), p);
  double r = std::round(x);
  if (std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(r))) return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::ceil(x));
}

/// P(message, outcome) in one of three faithful forms:
///  - Dense: explicit table (prior on rows, joint probabilities in cells);
///  - ProductChannel: uniform n-bit message read bit-by-bit, with per-read-bit
///    flip probabilities (unread bits reveal nothing);
///  - Diagonal: perfect decode of N equiprobable messages.
struct JointDistribution {
  enum class Form { Dense, ProductChannel, Diagonal };
  Form form = Form::Dense;

  // Dense
  std::vector<double> prior;
  Eigen::MatrixXd table;  // N x M
  std::vector<std::uint64_t> outcome_labels;
  int label_bit_count = 0;

  // ProductChannel
  std::int64_t bit_count = 0;
  std::vector<double> read_flip_probs;

  // Diagonal
  std::uint64_t message_count = 0;

  void validate() const {
    switch (form) {
      case Form::Dense: {
        if (table.size() == 0) throw InvariantError("empty joint table");
        if (table.minCoeff() < -1e-15) throw InvariantError("negative joint probability");
        if (std::abs(table.sum() - 1.0) > kComputeTol) throw InvariantError("joint table does not sum to 1");
        break;
      }
      case Form::ProductChannel:
        if (bit_count < 1 || static_cast<std::int64_t>(read_flip_probs.size()) > bit_count)
          throw InvariantError("malformed product channel");
        for (double q : read_flip_probs)
          if (q < 0.0 || q > 1.0) throw InvariantError("flip probability out of range");
        break;
      case Form::Diagonal:
        if (message_count < 1) throw InvariantError("empty diagonal distribution");
        break;
    }
  }
};

/// Expands a product channel to the explicit table over 2^k outcomes.
/// Test/oracle aid; only sensible at desk scale.
inline Eigen::MatrixXd expand_product_channel(const JointDistribution& jd) {
  if (jd.form != JointDistribution::Form::ProductChannel) throw std::invalid_argument("not a product channel");
  const int n = static_cast<int>(jd.bit_count);
  const int k = static_cast<int>(jd.read_flip_probs.size());
  if (n > 12) throw std::invalid_argument("dimension cap");
  const std::int64_t rows = std::int64_t(1) << n, cols = std::int64_t(1) << k;
  Eigen::MatrixXd table(rows, cols);
  const double prior = 1.0 / static_cast<double>(rows);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t s = 0; s < cols; ++s) {
      double p = prior;
      for (int b = 0; b < k; ++b) {
        int want = bit_at(static_cast<std::uint64_t>(i), b, n);
        int got = static_cast<int>((static_cast<std::uint64_t>(s) >> (k - 1 - b)) & 1u);
        p *= (want == got) ? 1.0 - jd.read_flip_probs[static_cast<std::size_t>(b)]
                           : jd.read_flip_probs[static_cast<std::size_t>(b)];
      }
      table(i, s) = p;
    }
  return table;
}

// ---- readout probabilities of product seals ---------------------------------

/// cos^2(theta_i): chance the standard-basis reading of qubit i returns b_i.
inline double per_bit_correct_prob(const ProductBitSeal& seal, int position) {
  double c = std::cos(seal.angle(position));
  return c * c;
}

inline double per_bit_correct_prob(const SealScheme& scheme, int position) {
  const ProductBitSeal* p = scheme.as_product();
  if (!p) throw std::invalid_argument("undefined per-bit probability");
  return per_bit_correct_prob(*p, position);
}

/// prod_i cos^2(theta_i), evaluated in log space so n = 10^6 is fine.
inline double string_correct_prob(const ProductBitSeal& seal) {
  double log_p = 0.0;
  for (double t : seal.angles()) log_p += 2.0 * std::log(std::cos(t));
  return std::exp(log_p);
}

inline double string_correct_prob(const SealScheme& scheme) {
  const ProductBitSeal* p = scheme.as_product();
  if (!p) throw std::invalid_argument("undefined per-bit probability");
  return string_correct_prob(*p);
}

/// prod_{i<k} cos^2(theta_i): chance the first-k-bits group is identified.
inline double partition_correct_prob(const ProductBitSeal& seal, int k) {
  if (k < 0 || k > seal.bit_count()) throw std::invalid_argument("k out of range");
  double log_p = 0.0;
  for (int i = 0; i < k; ++i) log_p += 2.0 * std::log(std::cos(seal.angle(i)));
  return std::exp(log_p);
}

/// Largest k whose first-k-bits group is still identified with probability
/// >= threshold; 0 if even one bit fails.
inline std::int64_t max_partition_size(const ProductBitSeal& seal, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must be in (0,1)");
  const double log_threshold = std::log(threshold);
  double log_p = 0.0;
  std::int64_t k_star = 0;
  for (int i = 0; i < seal.bit_count(); ++i) {
    log_p += 2.0 * std::log(std::cos(seal.angle(i)));
    if (log_p >= log_threshold)
      k_star = i + 1;
    else
      break;
  }
  return k_star;
}

// ---- joint distributions and entropies ---------------------------------------

inline constexpr std::int64_t kDenseTableCap = std::int64_t(1) << 24;

/// Exact P(message, outcome). Product seals read through a leading-bits layout
/// get the factorized form; everything else is enumerated densely.
inline JointDistribution joint_distribution(const SealScheme& scheme, const MeasurementInstrument& inst,
                                            const std::vector<double>& prior = {}) {
  inst.validate();
  const ProductBitSeal* product = scheme.as_product();
  if (product && inst.partition_layout() && prior.empty() &&
      inst.partition_layout()->qubit_count == product->bit_count()) {
    JointDistribution jd;
    jd.form = JointDistribution::Form::ProductChannel;
    jd.bit_count = product->bit_count();
    const int k = inst.partition_layout()->read_count;
    jd.read_flip_probs.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      double s = std::sin(product->angle(i));
      jd.read_flip_probs.push_back(s * s);
    }
    jd.validate();
    return jd;
  }

  const std::uint64_t n_messages = scheme.message_count();
  const std::int64_t cells = static_cast<std::int64_t>(n_messages) * static_cast<std::int64_t>(inst.outcome_count());
  if (n_messages > static_cast<std::uint64_t>(kDimensionCap) || cells > kDenseTableCap)
    throw std::invalid_argument("dense joint table too large");
  if (!prior.empty() && prior.size() != n_messages) throw std::invalid_argument("prior length mismatch");

  JointDistribution jd;
  jd.form = JointDistribution::Form::Dense;
  jd.prior.resize(n_messages);
  for (std::uint64_t i = 0; i < n_messages; ++i)
    jd.prior[i] = prior.empty() ? 1.0 / static_cast<double>(n_messages) : prior[i];
  jd.table.resize(static_cast<Eigen::Index>(n_messages), static_cast<Eigen::Index>(inst.outcome_count()));
  for (std::uint64_t i = 0; i < n_messages; ++i) {
    PureState psi = scheme.encode(i);
    for (std::size_t m = 0; m < inst.outcome_count(); ++m) {
      double p = inst.outcomes()[m].op.apply(psi.amplitudes()).squaredNorm();
      jd.table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = jd.prior[i] * (p < 0.0 ? 0.0 : p);
    }
  }
  jd.outcome_labels.reserve(inst.outcome_count());
  for (const Outcome& o : inst.outcomes()) jd.outcome_labels.push_back(o.label);
  if (inst.partition_layout())
    jd.label_bit_count = inst.partition_layout()->read_count;
  else if (inst.dim() > 0 && (inst.dim() & (inst.dim() - 1)) == 0 &&
           inst.outcome_count() == static_cast<std::size_t>(inst.dim())) {
    Eigen::Index d = inst.dim();
    while (d > 1) {
      d >>= 1;
      ++jd.label_bit_count;
    }
  }
  jd.validate();
  return jd;
}

struct Entropies {
  double H = 0.0;
  double H_cond = 0.0;
  double mutual_info = 0.0;
};

/// Shannon entropies in bits of the sealed message before and after seeing
/// the outcome.
inline Entropies entropies(const JointDistribution& jd) {
  jd.validate();
  Entropies e;
  switch (jd.form) {
    case JointDistribution::Form::Dense: {
      for (double p : jd.prior)
        if (p > 0.0) e.H -= p * std::log2(p);
      for (Eigen::Index m = 0; m < jd.table.cols(); ++m) {
        double pm = jd.table.col(m).sum();
        if (pm <= 0.0) continue;
        for (Eigen::Index i = 0; i < jd.table.rows(); ++i) {
          double p = jd.table(i, m);
          if (p > 0.0) e.H_cond -= p * std::log2(p / pm);
        }
      }
      break;
    }
    case JointDistribution::Form::ProductChannel: {
      e.H = static_cast<double>(jd.bit_count);
      for (double q : jd.read_flip_probs) e.H_cond += binary_entropy(q);
      e.H_cond += static_cast<double>(jd.bit_count) - static_cast<double>(jd.read_flip_probs.size());
      break;
    }
    case JointDistribution::Form::Diagonal:
      e.H = std::log2(static_cast<double>(jd.message_count));
      e.H_cond = 0.0;
      break;
  }
  e.mutual_info = e.H - e.H_cond;
  return e;
}

/// Everything the sweep reports about one (scheme, strategy, n) cell.
struct AnalysisReport {
  double H = 0.0;
  double H_cond = 0.0;
  double mutual_info = 0.0;
  std::vector<double> p_bit;
  double p_string = 0.0;
  double p_max = 0.0;
  std::int64_t k_star = 0;
  std::string criterion = "na";

  void validate() const {
    if (H_cond < -kComputeTol || H_cond > H + kComputeTol) throw InvariantError("H_cond outside [0, H]");
    if (std::abs(mutual_info - (H - H_cond)) > kComputeTol * std::max(1.0, H))
      throw InvariantError("mutual information inconsistent");
    for (double p : p_bit)
      if (p_string > p + kComputeTol) throw InvariantError("p_string exceeds a per-bit probability");
  }
};

// ---- family classification ----------------------------------------------------

struct ClassifierConfig {
  double H_crit = 4.0;
  double ratio_eps = 0.05;
  std::vector<std::int64_t> n_grid = {100, 1000, 10000};
  int trend_window = 3;
  double partition_threshold = 0.5;
  double info_ratio_min = 0.5;  // how close to 1 the mutual-information fraction must be for A
};

struct ClassificationRow {
  std::int64_t n = 0;
  double H = 0.0;
  double H_cond = 0.0;
  double ratio = 0.0;
};

struct Classification {
  std::string criterion;  // "A", "B" or "C"
  std::vector<ClassificationRow> evidence;
  std::string note = "finite-n heuristic verdict";
};

enum class ReadoutRule {
  Auto,             // honest full readout for product schemes, projective decode for orthonormal ones
  HonestReadout,    // force per-qubit standard-basis reading
  ProjectiveDecode  // force decoding onto the seal states
};

namespace detail {

inline ClassificationRow classification_row(const SealFamily& family, std::int64_t n, ReadoutRule rule) {
  ClassificationRow row;
  row.n = n;
  switch (family.kind()) {
    case SealFamily::Kind::Tilted:
    case SealFamily::Kind::FixedAngle: {
      if (rule == ReadoutRule::ProjectiveDecode)
        throw std::invalid_argument("seal states not orthonormal; projective decode undefined");
      auto scheme = family.instantiate(n);
      const ProductBitSeal* p = scheme->as_product();
      row.H = static_cast<double>(n);
      for (double t : p->angles()) row.H_cond += binary_entropy(std::sin(t) * std::sin(t));
      break;
    }
    case SealFamily::Kind::Fourier: {
      if (rule == ReadoutRule::HonestReadout) {
        auto scheme = family.instantiate(n);
        JointDistribution jd = joint_distribution(*scheme, honest_full_readout(static_cast<int>(n)));
        Entropies e = entropies(jd);
        row.H = e.H;
        row.H_cond = e.H_cond;
      } else {
        // Projective decode on orthonormal states is exact; validated against
        // the dense oracle at small N.
        row.H = static_cast<double>(n);
        row.H_cond = 0.0;
      }
      break;
    }
    case SealFamily::Kind::MatrixGenerator: {
      auto scheme = family.instantiate(n);
      const auto* m = dynamic_cast<const MatrixSeal*>(scheme.get());
      bool decodable = m && m->rows_orthonormal() &&
                       scheme->dense_dimension() == static_cast<Eigen::Index>(scheme->message_count());
      if (rule != ReadoutRule::HonestReadout && decodable) {
        row.H = std::log2(static_cast<double>(scheme->message_count()));
        row.H_cond = 0.0;
      } else {
        JointDistribution jd = joint_distribution(*scheme, basis_readout(scheme->dense_dimension()));
        Entropies e = entropies(jd);
        row.H = e.H;
        row.H_cond = e.H_cond;
      }
      break;
    }
  }
  row.ratio = row.H > 0.0 ? row.H_cond / row.H : 0.0;
  return row;
}

}  // namespace detail

/// Assigns the strongest non-concealment criterion the family exhibits on a
/// finite grid of lengths. The verdict is a trend heuristic; the evidence
/// table is always returned so the call can be audited.
inline Classification classify_family(const SealFamily& family, const ClassifierConfig& cfg = {},
                                      ReadoutRule rule = ReadoutRule::Auto) {
  std::vector<std::int64_t> grid;
  for (std::int64_t n : cfg.n_grid)
    if (family.admissible(n)) grid.push_back(n);
  if (static_cast<int>(grid.size()) < cfg.trend_window) {
    for (std::int64_t n : family.fallback_grid())
      if (family.admissible(n)) grid.push_back(n);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (static_cast<int>(grid.size()) < cfg.trend_window) throw std::invalid_argument("grid too small");

  Classification result;
  for (std::int64_t n : grid) result.evidence.push_back(detail::classification_row(family, n, rule));

  const std::size_t w = static_cast<std::size_t>(cfg.trend_window);
  const std::size_t start = result.evidence.size() - w;
  bool bounded = true, h_nonincreasing = true, ratio_nonincreasing = true;
  for (std::size_t i = start; i < result.evidence.size(); ++i) {
    bounded = bounded && result.evidence[i].H_cond <= cfg.H_crit + 1e-9;
    if (i > start) {
      h_nonincreasing = h_nonincreasing && result.evidence[i].H_cond <= result.evidence[i - 1].H_cond + 1e-12;
      ratio_nonincreasing = ratio_nonincreasing && result.evidence[i].ratio <= result.evidence[i - 1].ratio + 1e-12;
    }
  }
  const ClassificationRow& last = result.evidence.back();
  const double info_ratio = last.H > 0.0 ? 1.0 - last.ratio : 1.0;

  if (bounded && h_nonincreasing && info_ratio >= cfg.info_ratio_min)
    result.criterion = "A";
  else if (last.ratio <= cfg.ratio_eps && ratio_nonincreasing &&
           last.ratio < result.evidence[start].ratio - 1e-15)
    result.criterion = "B";
  else
    result.criterion = "C";
  return result;
}

// ---- asymptotics and the superposition-vs-mixture gap --------------------------

/// |cos^{2 ceil(n^{2 alpha})}(theta_cap / n^alpha) - exp(-theta_cap^2)|.
inline double asymptote_gap(double theta_cap, double alpha, std::int64_t n) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must be in (0, 1/2)");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (theta_cap == 0.0) return 0.0;
  const std::int64_t k = ceil_int_pow(n, 2.0 * alpha);
  const double theta = theta_cap / std::pow(static_cast<double>(n), alpha);
  const double log_p = 2.0 * static_cast<double>(k) * std::log(std::cos(theta));
  return std::abs(std::exp(log_p) - std::exp(-theta_cap * theta_cap));
}

namespace detail {

inline double mixture_distance(const Matrix& chi, const Matrix& psi_proj, const Matrix& basis_proj, double p) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(chi - p * psi_proj - (1.0 - p) * basis_proj,
                                               Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace detail

/// Normalizes chi ~ a|psi> + b <i|psi>|i> and returns the trace distance from
/// |chi><chi| to the nearest mixture p|psi><psi| + (1-p)|i><i|, minimized over
/// p by a coarse grid plus golden-section refinement (the objective is convex
/// in p).
inline double superposition_vs_mixture_gap(const PureState& psi, Eigen::Index i, Complex a_coef, Complex b_coef) {
  if (i < 0 || i >= psi.dim()) throw std::invalid_argument("basis index out of range");
  Vector raw = a_coef * psi.amplitudes();
  raw[i] += b_coef * psi.amplitudes()[i];
  if (!(raw.norm() > 0.0)) throw std::invalid_argument("null state");
  PureState chi = normalize(raw);

  const Matrix chi_proj = chi.amplitudes() * chi.amplitudes().adjoint();
  const Matrix psi_proj = psi.amplitudes() * psi.amplitudes().adjoint();
  Matrix basis_proj = Matrix::Zero(psi.dim(), psi.dim());
  basis_proj(i, i) = Complex(1.0, 0.0);

  constexpr int kGridPoints = 10000;
  double best_p = 0.0, best = std::numeric_limits<double>::infinity();
  for (int g = 0; g <= kGridPoints; ++g) {
    double p = static_cast<double>(g) / kGridPoints;
    double d = detail::mixture_distance(chi_proj, psi_proj, basis_proj, p);
    if (d < best) {
      best = d;
      best_p = p;
    }
  }
  double lo = std::max(0.0, best_p - 1.0 / kGridPoints);
  double hi = std::min(1.0, best_p + 1.0 / kGridPoints);
  const double golden = 0.61803398874989485;
  double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
  double f1 = detail::mixture_distance(chi_proj, psi_proj, basis_proj, x1);
  double f2 = detail::mixture_distance(chi_proj, psi_proj, basis_proj, x2);
  while (hi - lo > 1e-6) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = detail::mixture_distance(chi_proj, psi_proj, basis_proj, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = detail::mixture_distance(chi_proj, psi_proj, basis_proj, x2);
    }
  }
  return std::min({best, f1, f2});
}

}  // namespace qseal
