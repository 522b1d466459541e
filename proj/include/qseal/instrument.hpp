#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qseal/state.hpp"

namespace qseal {

/// One Kraus operator. Stored in the cheapest faithful form: dense, diagonal,
/// or rank-one (ket * bra^dagger). All forms answer the same questions, so an
/// instrument never cares which one it holds.
class KrausOperator {
 public:
  enum class Kind { Dense, Diagonal, RankOne };

  static KrausOperator dense(Matrix m) {
    if (m.rows() != m.cols() || m.rows() < 1) throw std::invalid_argument("Kraus operator must be square");
    KrausOperator k;
    k.kind_ = Kind::Dense;
    k.dense_ = std::move(m);
    return k;
  }

  static KrausOperator diagonal(Vector d) {
    if (d.size() < 1) throw std::invalid_argument("empty diagonal");
    KrausOperator k;
    k.kind_ = Kind::Diagonal;
    k.diag_ = std::move(d);
    return k;
  }

  // K = ket * bra^dagger
  static KrausOperator rank_one(Vector ket, Vector bra) {
    if (ket.size() != bra.size() || ket.size() < 1) throw std::invalid_argument("rank-one vectors must match");
    KrausOperator k;
    k.kind_ = Kind::RankOne;
    k.ket_ = std::move(ket);
    k.bra_ = std::move(bra);
    return k;
  }

  Kind kind() const { return kind_; }

  Eigen::Index dim() const {
    switch (kind_) {
      case Kind::Dense: return dense_.rows();
      case Kind::Diagonal: return diag_.size();
      case Kind::RankOne: return ket_.size();
    }
    return 0;
  }

  Vector apply(const Vector& psi) const {
    switch (kind_) {
      case Kind::Dense: return dense_ * psi;
      case Kind::Diagonal: return diag_.cwiseProduct(psi);
      case Kind::RankOne: return ket_ * bra_.dot(psi);
    }
    return {};
  }

  // <psi|K|psi>
  Complex expectation(const Vector& psi) const {
    switch (kind_) {
      case Kind::Dense: return psi.dot(dense_ * psi);
      case Kind::Diagonal: {
        Complex acc(0.0, 0.0);
        for (Eigen::Index j = 0; j < diag_.size(); ++j) acc += diag_[j] * std::norm(psi[j]);
        return acc;
      }
      case Kind::RankOne: return psi.dot(ket_) * bra_.dot(psi);
    }
    return {};
  }

  Matrix to_dense() const {
    switch (kind_) {
      case Kind::Dense: return dense_;
      case Kind::Diagonal: return Matrix(diag_.asDiagonal());
      case Kind::RankOne: return ket_ * bra_.adjoint();
    }
    return {};
  }

  // acc += K^dagger K
  void add_ktk(Matrix& acc) const {
    switch (kind_) {
      case Kind::Dense: acc += dense_.adjoint() * dense_; break;
      case Kind::Diagonal:
        for (Eigen::Index j = 0; j < diag_.size(); ++j) acc(j, j) += std::norm(diag_[j]);
        break;
      case Kind::RankOne: acc += ket_.squaredNorm() * (bra_ * bra_.adjoint()); break;
    }
  }

  const Vector& diagonal_entries() const { return diag_; }
  const Vector& ket() const { return ket_; }
  const Vector& bra() const { return bra_; }

 private:
  KrausOperator() = default;
  Kind kind_ = Kind::Dense;
  Matrix dense_;
  Vector diag_;
  Vector ket_, bra_;
};

struct Outcome {
  std::uint64_t label = 0;
  KrausOperator op;
};

struct OutcomeWeight {
  std::uint64_t label = 0;
  double probability = 0.0;
  PureState post_state;
};
using OutcomeEnsemble = std::vector<OutcomeWeight>;

// Present when an instrument reads the leading qubits of an n-qubit register
// in the standard basis. Enables the factorized fast path.
struct PartitionLayout {
  int qubit_count = 0;  // n
  int read_count = 0;   // k
};

/// A finite measurement instrument: outcome-labeled Kraus operators.
/// Completeness (sum K^dagger K = I) is measured at construction and enforced
/// before any evaluation, so an ill-formed instrument can be built and
/// inspected but never applied.
class MeasurementInstrument {
 public:
  MeasurementInstrument(std::vector<Outcome> outcomes, double completeness_tolerance = kConstructTol,
                        std::optional<PartitionLayout> layout = std::nullopt)
      : outcomes_(std::move(outcomes)), tol_(completeness_tolerance), layout_(layout) {
    if (outcomes_.empty()) throw std::invalid_argument("instrument needs at least one outcome");
    dim_ = outcomes_.front().op.dim();
    for (const Outcome& o : outcomes_)
      if (o.op.dim() != dim_) throw std::invalid_argument("mixed operator dimensions");
    residual_ = completeness_residual();
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t outcome_count() const { return outcomes_.size(); }
  const std::vector<Outcome>& outcomes() const { return outcomes_; }
  double tolerance() const { return tol_; }
  double residual() const { return residual_; }
  const std::optional<PartitionLayout>& partition_layout() const { return layout_; }

  void validate() const {
    if (residual_ > tol_) throw InvariantError("instrument incomplete: residual " + std::to_string(residual_));
  }

  std::string label_text(std::uint64_t label) const {
    if (layout_) {
      std::string s(static_cast<std::size_t>(layout_->read_count), '0');
      for (int b = 0; b < layout_->read_count; ++b)
        if ((label >> (layout_->read_count - 1 - b)) & 1u) s[static_cast<std::size_t>(b)] = '1';
      return s;
    }
    return std::to_string(label);
  }

 private:
  // Upper bound on max_ij |(sum K^dagger K - I)_ij|, computed in whichever
  // form avoids materializing a D x D accumulator.
  double completeness_residual() const {
    bool all_diag = true, all_rank_one = true;
    for (const Outcome& o : outcomes_) {
      all_diag = all_diag && o.op.kind() == KrausOperator::Kind::Diagonal;
      all_rank_one = all_rank_one && o.op.kind() == KrausOperator::Kind::RankOne;
    }
    if (all_diag) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_);
      for (const Outcome& o : outcomes_)
        for (Eigen::Index j = 0; j < dim_; ++j) acc[j] += std::norm(o.op.diagonal_entries()[j]);
      return (acc.array() - 1.0).abs().maxCoeff();
    }
    if (all_rank_one && static_cast<Eigen::Index>(outcomes_.size()) == dim_) {
      // For K_i = ket_i bra_i^dagger, sum K^dagger K = C^dagger C with row i of
      // C equal to |ket_i| bra_i^dagger. With as many outcomes as dimensions,
      // ||C^dagger C - I||_F = ||C C^dagger - I||_F, and the right side is a
      // small Gram computation that stays numerically clean.
      const std::size_t n = outcomes_.size();
      std::vector<double> w(n);
      for (std::size_t i = 0; i < n; ++i) w[i] = std::sqrt(outcomes_[i].op.ket().squaredNorm());
      double frob2 = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          Complex g = w[i] * w[j] * outcomes_[i].op.bra().dot(outcomes_[j].op.bra());
          if (i == j) g -= 1.0;
          frob2 += std::norm(g);
        }
      return std::sqrt(std::max(frob2, 0.0));
    }
    if (dim_ > 2048) throw std::invalid_argument("completeness check needs a dense accumulator; dimension too large");
    Matrix acc = Matrix::Zero(dim_, dim_);
    for (const Outcome& o : outcomes_) o.op.add_ktk(acc);
    acc -= Matrix::Identity(dim_, dim_);
    return acc.cwiseAbs().maxCoeff();
  }

  Eigen::Index dim_ = 0;
  std::vector<Outcome> outcomes_;
  double tol_ = kConstructTol;
  double residual_ = 0.0;
  std::optional<PartitionLayout> layout_;
};

namespace detail {

inline OutcomeEnsemble apply_partition_factorized(const MeasurementInstrument& inst, const PureState& state) {
  const PartitionLayout& lay = *inst.partition_layout();
  const std::vector<QubitFactor>& factors = *state.qubit_factors();
  const int k = lay.read_count;
  OutcomeEnsemble out;
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << k); ++s) {
    double p = 1.0;
    for (int b = 0; b < k; ++b) {
      int bit = static_cast<int>((s >> (k - 1 - b)) & 1u);
      p *= std::norm(bit == 0 ? factors[static_cast<std::size_t>(b)].a0 : factors[static_cast<std::size_t>(b)].a1);
    }
    if (p < kOutcomeFloor) continue;
    std::vector<QubitFactor> post = factors;
    for (int b = 0; b < k; ++b) {
      int bit = static_cast<int>((s >> (k - 1 - b)) & 1u);
      post[static_cast<std::size_t>(b)] =
          bit == 0 ? QubitFactor{Complex(1, 0), Complex(0, 0)} : QubitFactor{Complex(0, 0), Complex(1, 0)};
    }
    out.push_back(OutcomeWeight{s, p, PureState::product(std::move(post))});
  }
  return out;
}

}  // namespace detail

/// Born/Kraus rule: outcome probabilities ||K_m psi||^2 and normalized
/// post-measurement states. Outcomes below kOutcomeFloor are dropped.
inline OutcomeEnsemble apply_instrument(const MeasurementInstrument& inst, const PureState& state) {
  inst.validate();
  if (inst.dim() != state.dim()) throw std::invalid_argument("dimension mismatch");

  OutcomeEnsemble out;
  if (inst.partition_layout() && state.qubit_factors() &&
      state.qubit_factors()->size() == static_cast<std::size_t>(inst.partition_layout()->qubit_count)) {
    out = detail::apply_partition_factorized(inst, state);
  } else {
    for (const Outcome& o : inst.outcomes()) {
      Vector v = o.op.apply(state.amplitudes());
      double p = v.squaredNorm();
      if (p < kOutcomeFloor) continue;
      out.push_back(OutcomeWeight{o.label, p, PureState(v / std::sqrt(p))});
    }
  }

  double total = 0.0;
  for (const OutcomeWeight& w : out) total += w.probability;
  if (std::abs(total - 1.0) > kComputeTol)
    throw InvariantError("outcome probabilities sum to " + std::to_string(total));
  return out;
}

}  // namespace qseal
