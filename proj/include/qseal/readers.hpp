#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qseal/instrument.hpp"
#include "qseal/seals.hpp"

namespace qseal {

/// Parameters of the one-parameter readout family K_i = a(nu) I + b(nu)|i><i|.
/// b(nu) = nu; a(nu) is the positive completeness root, so nu = 0 is the
/// identity channel (up to scale) and nu = 1 the projective basis readout.
struct QPovmParams {
  Eigen::Index dimension = 0;
  double nu = 0.0;
  double a = 0.0;
  double b = 0.0;

  static QPovmParams resolve(Eigen::Index count, double nu) {
    if (count < 1) throw std::invalid_argument("N must be >= 1");
    if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("nu must be in [0,1]");
    const double n = static_cast<double>(count);
    QPovmParams p;
    p.dimension = count;
    p.nu = nu;
    p.b = nu;
    p.a = (-nu + std::sqrt(nu * nu + n * (1.0 - nu * nu))) / n;
    const double residual = std::abs(n * p.a * p.a + 2.0 * p.a * p.b + p.b * p.b - 1.0);
    if (residual > kConstructTol) throw InvariantError("q_povm completeness residual " + std::to_string(residual));
    return p;
  }
};

/// N outcomes with K_i = a I + b |i><i| (diagonal in the standard basis).
inline MeasurementInstrument q_povm(Eigen::Index count, double nu) {
  QPovmParams p = QPovmParams::resolve(count, nu);
  std::vector<Outcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    Vector d = Vector::Constant(count, Complex(p.a, 0.0));
    d[i] += Complex(p.b, 0.0);
    outcomes.push_back(Outcome{static_cast<std::uint64_t>(i), KrausOperator::diagonal(std::move(d))});
  }
  MeasurementInstrument inst(std::move(outcomes));
  inst.validate();
  return inst;
}

/// Standard-basis readout of the first k of n qubits; the rest stay untouched.
/// Outcome s is the projector onto "leading k bits equal s".
inline MeasurementInstrument partition_readout(int n, int k) {
  if (n < 1 || n > 12) throw std::invalid_argument("dimension cap");
  if (k < 1 || k > n) throw std::invalid_argument("k out of range");
  const Eigen::Index dim = Eigen::Index(1) << n;
  std::vector<Outcome> outcomes;
  outcomes.reserve(std::size_t(1) << k);
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << k); ++s) {
    Vector d = Vector::Zero(dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      if ((static_cast<std::uint64_t>(j) >> (n - k)) == s) d[j] = Complex(1.0, 0.0);
    outcomes.push_back(Outcome{s, KrausOperator::diagonal(std::move(d))});
  }
  MeasurementInstrument inst(std::move(outcomes), kConstructTol, PartitionLayout{n, k});
  inst.validate();
  return inst;
}

/// Full standard-basis projective readout of an n-qubit register.
inline MeasurementInstrument honest_full_readout(int n) { return partition_readout(n, n); }

/// One-hot projectors |j><j| for a register of arbitrary dimension.
inline MeasurementInstrument basis_readout(Eigen::Index dim) {
  if (dim < 1 || dim > kDimensionCap) throw std::invalid_argument("dimension cap");
  std::vector<Outcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index j = 0; j < dim; ++j) {
    Vector d = Vector::Zero(dim);
    d[j] = Complex(1.0, 0.0);
    outcomes.push_back(Outcome{static_cast<std::uint64_t>(j), KrausOperator::diagonal(std::move(d))});
  }
  MeasurementInstrument inst(std::move(outcomes));
  inst.validate();
  return inst;
}

/// Projective decode onto the seal's own states. Defined only when those
/// states form a complete orthonormal set, which is what makes the seal
/// perfectly readable.
inline MeasurementInstrument projective_decode(const SealScheme& seal) {
  if (!seal.has_rows()) throw std::invalid_argument("seal states not orthonormal; projective decode undefined");
  const std::uint64_t n = seal.message_count();
  if (seal.dense_dimension() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("seal states not orthonormal; projective decode undefined");
  if (const auto* m = dynamic_cast<const MatrixSeal*>(&seal)) {
    if (!m->rows_orthonormal()) throw std::invalid_argument("seal states not orthonormal; projective decode undefined");
  }
  std::vector<Outcome> outcomes;
  outcomes.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t i = 0; i < n; ++i) {
    Vector r = seal.row(i);
    outcomes.push_back(Outcome{i, KrausOperator::rank_one(r, r)});
  }
  MeasurementInstrument inst(std::move(outcomes));
  inst.validate();
  return inst;
}

/// The first-k-bits grouping of the message space, with the probability that
/// standard-basis readout of those k qubits lands in the right group.
struct PartitionSpec {
  int n = 0;
  int k = 0;
  double p_max = 0.0;

  std::uint64_t element_of(std::uint64_t bits) const { return bits >> (n - k); }
  std::uint64_t element_count() const { return std::uint64_t(1) << k; }
  double log2_size() const { return static_cast<double>(k); }
};

inline PartitionSpec first_bits_partition(const ProductBitSeal& seal, int k) {
  if (k < 1 || k > seal.bit_count()) throw std::invalid_argument("k out of range");
  double log_p = 0.0;
  for (int i = 0; i < k; ++i) log_p += 2.0 * std::log(std::cos(seal.angle(i)));
  return PartitionSpec{seal.bit_count(), k, std::exp(log_p)};
}

}  // namespace qseal
