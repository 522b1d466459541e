#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qseal/errors.hpp"

namespace qseal {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Dense paths stop at 12 qubits; analytic product paths never expand amplitudes.
inline constexpr Eigen::Index kDimensionCap = 4096;
// Construction-time tolerance (normalization, hermiticity, trace).
inline constexpr double kConstructTol = 1e-12;
// Tolerance for derived quantities (probability sums, overlaps).
inline constexpr double kComputeTol = 1e-10;
// Outcomes below this probability are dropped from ensembles.
inline constexpr double kOutcomeFloor = 1e-14;

// Amplitude pair of one qubit factor of a product state.
struct QubitFactor {
  Complex a0{1.0, 0.0};
  Complex a1{0.0, 0.0};
};

// Expands per-qubit factors to a dense amplitude vector.
// Big-endian convention: factor 0 owns the most significant index bit.
inline Vector expand_factors(const std::vector<QubitFactor>& factors) {
  if (factors.size() > 12) throw std::invalid_argument("dimension cap");
  Vector out(1);
  out[0] = Complex(1.0, 0.0);
  for (const QubitFactor& f : factors) {
    Vector next(out.size() * 2);
    for (Eigen::Index j = 0; j < out.size(); ++j) {
      next[2 * j] = out[j] * f.a0;
      next[2 * j + 1] = out[j] * f.a1;
    }
    out.swap(next);
  }
  return out;
}

/// A normalized pure state over a computational basis. Immutable after
/// construction. When the state is an explicit qubit product, the per-qubit
/// amplitude pairs are carried along so measurement code can stay in the
/// factorized picture.
class PureState {
 public:
  explicit PureState(Vector amplitudes) : amps_(std::move(amplitudes)) { check_norm(); }

  PureState(Vector amplitudes, std::vector<QubitFactor> factors)
      : amps_(std::move(amplitudes)), factors_(std::move(factors)) {
    check_norm();
    if ((Eigen::Index(1) << factors_->size()) != amps_.size())
      throw std::invalid_argument("qubit factorization does not match dimension");
    Vector expanded = expand_factors(*factors_);
    if ((expanded - amps_).cwiseAbs().maxCoeff() > kConstructTol)
      throw InvariantError("qubit factorization does not reproduce amplitudes");
  }

  static PureState product(std::vector<QubitFactor> factors) {
    Vector amps = expand_factors(factors);
    return PureState(std::move(amps), std::move(factors));
  }

  static PureState basis(Eigen::Index dim, Eigen::Index index) {
    if (dim < 1 || index < 0 || index >= dim) throw std::invalid_argument("basis index out of range");
    Vector v = Vector::Zero(dim);
    v[index] = Complex(1.0, 0.0);
    return PureState(std::move(v));
  }

  Eigen::Index dim() const { return amps_.size(); }
  const Vector& amplitudes() const { return amps_; }
  const std::optional<std::vector<QubitFactor>>& qubit_factors() const { return factors_; }

 private:
  void check_norm() const {
    if (amps_.size() < 1) throw std::invalid_argument("null state");
    double sum = amps_.squaredNorm();
    if (std::abs(sum - 1.0) > kConstructTol) throw InvariantError("state not normalized");
  }

  Vector amps_;
  std::optional<std::vector<QubitFactor>> factors_;
};

/// Scales a raw amplitude vector to unit norm.
inline PureState normalize(const Vector& raw) {
  double n = raw.norm();
  if (!(n > 0.0)) throw std::invalid_argument("null state");
  return PureState(raw / n);
}

/// Tensor product, big-endian: the first factor owns the most significant
/// part of the basis index.
inline PureState tensor(const PureState& a, const PureState& b) {
  Eigen::Index da = a.dim(), db = b.dim();
  if (da > kDimensionCap / db) throw std::invalid_argument("dimension cap");
  Vector out(da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < db; ++j) out[i * db + j] = a.amplitudes()[i] * b.amplitudes()[j];
  if (a.qubit_factors() && b.qubit_factors()) {
    std::vector<QubitFactor> f = *a.qubit_factors();
    f.insert(f.end(), b.qubit_factors()->begin(), b.qubit_factors()->end());
    return PureState(std::move(out), std::move(f));
  }
  return PureState(std::move(out));
}

inline Complex inner(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  return a.amplitudes().dot(b.amplitudes());  // conjugates a
}

/// |<a|b>|^2, the verifier's pass probability for a projective check.
inline double fidelity(const PureState& a, const PureState& b) { return std::norm(inner(a, b)); }

/// A density operator: Hermitian, unit trace. Positivity is checked on demand
/// (eigendecomposition is not free at D=4096).
class DensityOperator {
 public:
  explicit DensityOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) throw std::invalid_argument("density matrix must be square");
    double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kConstructTol) throw std::invalid_argument("density matrix not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > kConstructTol || std::abs(m_.trace().imag()) > kConstructTol)
      throw InvariantError("density matrix trace != 1");
  }

  static DensityOperator pure(const PureState& psi) {
    return DensityOperator(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityOperator mixture(const std::vector<double>& weights, const std::vector<PureState>& states) {
    if (weights.empty() || weights.size() != states.size())
      throw std::invalid_argument("mixture needs matching weights and states");
    Matrix m = Matrix::Zero(states[0].dim(), states[0].dim());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] < -kConstructTol) throw std::invalid_argument("mixture weight < 0");
      m += weights[i] * (states[i].amplitudes() * states[i].amplitudes().adjoint());
    }
    return DensityOperator(std::move(m));
  }

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

 private:
  Matrix m_;
};

/// (1/2) sum |eigenvalues(rho - sigma)|.
inline double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix() - sigma.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace qseal
