#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qseal/state.hpp"

namespace qseal {

inline constexpr double kQuarterPi = 0.78539816339744831;

// Bit i of an n-bit string, big-endian: position 0 is the most significant
// index bit, matching "first k qubits" readouts.
inline int bit_at(std::uint64_t message, int position, int n) {
  return static_cast<int>((message >> (n - 1 - position)) & 1u);
}

class ProductBitSeal;

/// Common surface of every seal encoding: classical message in, pure state out.
class SealScheme {
 public:
  virtual ~SealScheme() = default;
  virtual std::string kind_name() const = 0;
  virtual std::uint64_t message_count() const = 0;
  virtual Eigen::Index dense_dimension() const = 0;
  virtual PureState encode(std::uint64_t message) const = 0;
  virtual const ProductBitSeal* as_product() const { return nullptr; }
  virtual bool has_rows() const { return false; }
  virtual Vector row(std::uint64_t i) const { return encode(i).amplitudes(); }
};

/// Per-bit product encoding: qubit i carries cos(theta_i)|b_i> + sin(theta_i)|~b_i>.
class ProductBitSeal : public SealScheme {
 public:
  explicit ProductBitSeal(std::vector<double> angles) : angles_(std::move(angles)) {
    if (angles_.empty()) throw std::invalid_argument("seal needs at least one bit");
    if (angles_.size() > (1u << 24)) throw std::invalid_argument("string length too large");
  }

  int bit_count() const { return static_cast<int>(angles_.size()); }
  const std::vector<double>& angles() const { return angles_; }
  double angle(int position) const { return angles_.at(static_cast<std::size_t>(position)); }

  std::string kind_name() const override { return "product"; }

  std::uint64_t message_count() const override {
    if (bit_count() > 62) throw std::invalid_argument("message count exceeds 2^62");
    return std::uint64_t(1) << bit_count();
  }

  Eigen::Index dense_dimension() const override {
    if (bit_count() > 12) throw std::invalid_argument("dimension cap");
    return Eigen::Index(1) << bit_count();
  }

  QubitFactor factor_for(int position, int bit) const {
    double c = std::cos(angle(position)), s = std::sin(angle(position));
    return bit == 0 ? QubitFactor{Complex(c, 0), Complex(s, 0)} : QubitFactor{Complex(s, 0), Complex(c, 0)};
  }

  PureState encode(std::uint64_t message) const override {
    const int n = bit_count();
    if (n > 12) throw std::invalid_argument("dimension cap");
    if (message >= message_count()) throw std::invalid_argument("message out of range");
    std::vector<QubitFactor> factors;
    factors.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) factors.push_back(factor_for(i, bit_at(message, i, n)));
    return PureState::product(std::move(factors));
  }

  const ProductBitSeal* as_product() const override { return this; }

 private:
  std::vector<double> angles_;
};

/// Scheme with per-bit tilts bounded by theta_cap / n^alpha.
class TiltedProductSeal : public ProductBitSeal {
 public:
  TiltedProductSeal(double theta_cap, double alpha, std::vector<double> angles)
      : ProductBitSeal(std::move(angles)), theta_cap_(theta_cap), alpha_(alpha) {
    if (!(theta_cap_ >= 0.0)) throw std::invalid_argument("theta_cap must be >= 0");
    if (theta_cap_ >= kQuarterPi) throw std::invalid_argument("theta_cap must be < \xCF\x80/4");
    if (!(alpha_ > 0.0)) throw std::invalid_argument("alpha must be > 0");
    const double bound = theta_cap_ / std::pow(static_cast<double>(bit_count()), alpha_);
    for (double t : this->angles())
      if (std::abs(t) > bound + 1e-15) throw std::invalid_argument("angle exceeds theta_cap / n^alpha bound");
  }

  // Every tilt at the extreme of the bound.
  static TiltedProductSeal worst_case(int n, double theta_cap, double alpha) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    double t = theta_cap / std::pow(static_cast<double>(n), alpha);
    return TiltedProductSeal(theta_cap, alpha, std::vector<double>(static_cast<std::size_t>(n), t));
  }

  std::string kind_name() const override { return "tilted"; }
  double theta_cap() const { return theta_cap_; }
  double alpha() const { return alpha_; }

 private:
  double theta_cap_;
  double alpha_;
};

/// Every bit sealed at the same fixed tilt, independent of n.
class FixedAngleBitSeal : public ProductBitSeal {
 public:
  FixedAngleBitSeal(int n, double theta)
      : ProductBitSeal(std::vector<double>(n >= 1 ? static_cast<std::size_t>(n) : 0, theta)), theta_(theta) {
    if (std::abs(theta_) >= kQuarterPi) throw std::invalid_argument("theta must satisfy |theta| < \xCF\x80/4");
  }

  std::string kind_name() const override { return "fixed_angle"; }
  double theta() const { return theta_; }

 private:
  double theta_;
};

/// General linear encoding: message i is sealed as row i of a lambda matrix.
class MatrixSeal : public SealScheme {
 public:
  explicit MatrixSeal(Matrix lambda) : lambda_(std::move(lambda)) {
    if (lambda_.rows() < 1 || lambda_.cols() < 1) throw std::invalid_argument("lambda matrix is empty");
    for (Eigen::Index i = 0; i < lambda_.rows(); ++i)
      if (std::abs(lambda_.row(i).squaredNorm() - 1.0) > kConstructTol)
        throw InvariantError("lambda row " + std::to_string(i) + " not normalized");
  }

  std::string kind_name() const override { return "matrix"; }
  std::uint64_t message_count() const override { return static_cast<std::uint64_t>(lambda_.rows()); }
  Eigen::Index dense_dimension() const override { return lambda_.cols(); }
  const Matrix& lambda() const { return lambda_; }

  PureState encode(std::uint64_t i) const override {
    if (i >= message_count()) throw std::invalid_argument("message index out of range");
    return PureState(lambda_.row(static_cast<Eigen::Index>(i)).transpose());
  }

  bool has_rows() const override { return true; }
  Vector row(std::uint64_t i) const override {
    if (i >= message_count()) throw std::invalid_argument("message index out of range");
    return lambda_.row(static_cast<Eigen::Index>(i)).transpose();
  }

  bool rows_orthonormal(double tol = kComputeTol) const {
    for (Eigen::Index i = 0; i < lambda_.rows(); ++i)
      for (Eigen::Index j = i; j < lambda_.rows(); ++j) {
        Complex g = lambda_.row(i).conjugate().dot(lambda_.row(j).transpose());
        double want = i == j ? 1.0 : 0.0;
        if (std::abs(g - Complex(want, 0)) > tol) return false;
      }
    return true;
  }

 private:
  Matrix lambda_;
};

/// Amplitude j of the i-th Fourier seal state: omega_N^{ij} / sqrt(N).
inline Vector fourier_row(std::uint64_t count, std::uint64_t i) {
  if (count < 1) throw std::invalid_argument("N must be >= 1");
  if (i >= count) throw std::invalid_argument("message index out of range");
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(count));
  const double two_pi = 6.28318530717958648;
  Vector v(static_cast<Eigen::Index>(count));
  for (std::uint64_t j = 0; j < count; ++j) {
    double phase = two_pi * static_cast<double>((i * j) % count) / static_cast<double>(count);
    v[static_cast<Eigen::Index>(j)] = Complex(std::cos(phase), std::sin(phase)) * inv_sqrt;
  }
  return v;
}

inline PureState fourier_state(std::uint64_t count, std::uint64_t i) { return PureState(fourier_row(count, i)); }

/// The orthonormal Fourier seal family member with N messages = N dimensions.
/// Rows are generated on demand; nothing of size N^2 is ever stored.
class FourierSeal : public SealScheme {
 public:
  explicit FourierSeal(std::uint64_t count) : count_(count) {
    if (count_ < 1) throw std::invalid_argument("N must be >= 1");
    if (count_ > static_cast<std::uint64_t>(kDimensionCap)) throw std::invalid_argument("dimension cap");
  }

  std::string kind_name() const override { return "fourier"; }
  std::uint64_t message_count() const override { return count_; }
  Eigen::Index dense_dimension() const override { return static_cast<Eigen::Index>(count_); }
  PureState encode(std::uint64_t i) const override { return fourier_state(count_, i); }
  bool has_rows() const override { return true; }
  Vector row(std::uint64_t i) const override { return fourier_row(count_, i); }

 private:
  std::uint64_t count_;
};

/// Loads a lambda matrix from CSV with columns row,col,re,im. Unlisted
/// entries are zero; a header line is skipped if present.
inline MatrixSeal load_matrix_seal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lambda CSV: " + path);
  struct Entry {
    Eigen::Index r, c;
    Complex v;
  };
  std::vector<Entry> entries;
  Eigen::Index max_r = -1, max_c = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) throw ConfigError("lambda CSV line " + std::to_string(line_no) + ": expected row,col,re,im");
    try {
      Eigen::Index r = std::stoll(fields[0]), c = std::stoll(fields[1]);
      double re = std::stod(fields[2]), im = std::stod(fields[3]);
      if (r < 0 || c < 0) throw ConfigError("lambda CSV line " + std::to_string(line_no) + ": negative index");
      entries.push_back(Entry{r, c, Complex(re, im)});
      max_r = std::max(max_r, r);
      max_c = std::max(max_c, c);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header row
      throw ConfigError("lambda CSV line " + std::to_string(line_no) + ": cannot parse numbers");
    }
  }
  if (entries.empty()) throw ConfigError("lambda CSV has no entries: " + path);
  Matrix lambda = Matrix::Zero(max_r + 1, max_c + 1);
  for (const Entry& e : entries) lambda(e.r, e.c) = e.v;
  return MatrixSeal(std::move(lambda));
}

/// A seal scheme parameterized by string length n.
class SealFamily {
 public:
  enum class Kind { Tilted, FixedAngle, Fourier, MatrixGenerator };
  using AngleRule = std::function<double(int position, int n)>;
  using MatrixRule = std::function<MatrixSeal(int n)>;

  static SealFamily tilted(double theta_cap, double alpha, AngleRule rule = nullptr) {
    SealFamily f;
    f.kind_ = Kind::Tilted;
    f.theta_cap_ = theta_cap;
    f.alpha_ = alpha;
    f.angle_rule_ = std::move(rule);
    // fail fast on bad parameters
    (void)TiltedProductSeal::worst_case(1, theta_cap, alpha);
    return f;
  }

  static SealFamily fixed_angle(double theta) {
    SealFamily f;
    f.kind_ = Kind::FixedAngle;
    f.theta_ = theta;
    (void)FixedAngleBitSeal(1, theta);
    return f;
  }

  static SealFamily fourier() {
    SealFamily f;
    f.kind_ = Kind::Fourier;
    return f;
  }

  static SealFamily matrix_generator(MatrixRule rule) {
    if (!rule) throw std::invalid_argument("matrix generator rule is required");
    SealFamily f;
    f.kind_ = Kind::MatrixGenerator;
    f.matrix_rule_ = std::move(rule);
    return f;
  }

  Kind kind() const { return kind_; }
  double theta_cap() const { return theta_cap_; }
  double alpha() const { return alpha_; }
  double theta() const { return theta_; }

  bool admissible(std::int64_t n) const {
    switch (kind_) {
      case Kind::Tilted:
      case Kind::FixedAngle: return n >= 1 && n <= (1 << 24);
      case Kind::Fourier: return n >= 1 && n <= 12;  // N = 2^n within the dense cap
      case Kind::MatrixGenerator: return n >= 1;
    }
    return false;
  }

  std::unique_ptr<SealScheme> instantiate(std::int64_t n) const {
    if (!admissible(n))
      throw std::invalid_argument("n=" + std::to_string(n) + " not admissible for this family");
    switch (kind_) {
      case Kind::Tilted: {
        if (!angle_rule_) return std::make_unique<TiltedProductSeal>(TiltedProductSeal::worst_case(
            static_cast<int>(n), theta_cap_, alpha_));
        std::vector<double> angles(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) angles[static_cast<std::size_t>(i)] = angle_rule_(i, static_cast<int>(n));
        return std::make_unique<TiltedProductSeal>(theta_cap_, alpha_, std::move(angles));
      }
      case Kind::FixedAngle: return std::make_unique<FixedAngleBitSeal>(static_cast<int>(n), theta_);
      case Kind::Fourier: return std::make_unique<FourierSeal>(std::uint64_t(1) << n);
      case Kind::MatrixGenerator: return std::make_unique<MatrixSeal>(matrix_rule_(static_cast<int>(n)));
    }
    throw std::logic_error("unreachable");
  }

  // Grid the classifier falls back to when none of the requested lengths are
  // admissible (dense-only families cannot reach n in the thousands).
  std::vector<std::int64_t> fallback_grid() const {
    if (kind_ == Kind::Fourier) return {4, 6, 8, 10, 12};
    return {};
  }

 private:
  SealFamily() = default;
  Kind kind_ = Kind::Tilted;
  double theta_cap_ = 0.0;
  double alpha_ = 0.0;
  double theta_ = 0.0;
  AngleRule angle_rule_;
  MatrixRule matrix_rule_;
};

}  // namespace qseal
