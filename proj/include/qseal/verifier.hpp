#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "qseal/instrument.hpp"
#include "qseal/seals.hpp"

namespace qseal {

/// Detection-side view of one attack: probability the reader's post-state
/// still passes the owner's projective check onto the original sealed state,
/// alone and jointly with the readout succeeding.
struct DetectionReport {
  double escape_prob = 0.0;
  double joint_success_escape = 0.0;
  double success_prob = 0.0;

  void validate() const {
    if (joint_success_escape > std::min(escape_prob, success_prob) + kComputeTol)
      throw InvariantError("joint success/escape exceeds its marginals");
  }
};

/// sum_m |<psi|K_m|psi>|^2: the chance outcome m occurs and the post-state
/// passes the check, summed over outcomes.
inline double escape_probability(const PureState& sealed, const MeasurementInstrument& inst) {
  inst.validate();
  if (inst.dim() != sealed.dim()) throw std::invalid_argument("dimension mismatch");
  if (inst.partition_layout() && sealed.qubit_factors() &&
      sealed.qubit_factors()->size() == static_cast<std::size_t>(inst.partition_layout()->qubit_count)) {
    // Per measured qubit: sum_b |a_b|^4. Untouched factors contribute 1.
    double p = 1.0;
    const auto& factors = *sealed.qubit_factors();
    for (int i = 0; i < inst.partition_layout()->read_count; ++i) {
      const QubitFactor& f = factors[static_cast<std::size_t>(i)];
      double p0 = std::norm(f.a0), p1 = std::norm(f.a1);
      p *= p0 * p0 + p1 * p1;
    }
    return p;
  }
  double total = 0.0;
  for (const Outcome& o : inst.outcomes()) total += std::norm(o.op.expectation(sealed.amplitudes()));
  return total;
}

using SuccessPredicate = std::function<bool(std::uint64_t label)>;

inline DetectionReport joint_success_escape(const PureState& sealed, const MeasurementInstrument& inst,
                                            const SuccessPredicate& success) {
  inst.validate();
  if (inst.dim() != sealed.dim()) throw std::invalid_argument("dimension mismatch");
  DetectionReport report;
  for (const Outcome& o : inst.outcomes()) {
    double p = o.op.apply(sealed.amplitudes()).squaredNorm();
    double pass = std::norm(o.op.expectation(sealed.amplitudes()));
    report.escape_prob += pass;
    if (success(o.label)) {
      report.joint_success_escape += pass;
      report.success_prob += p;
    }
  }
  report.validate();
  return report;
}

inline DetectionReport joint_success_escape(const SealScheme& scheme, std::uint64_t message,
                                            const MeasurementInstrument& inst, const SuccessPredicate& success) {
  return joint_success_escape(scheme.encode(message), inst, success);
}

/// Closed form for a product seal under first-k-bits readout, valid at any n:
/// per measured qubit the joint correct-and-pass weight is cos^4,
/// the pass weight regardless of outcome is cos^4 + sin^4.
inline DetectionReport partition_detection_report(const ProductBitSeal& seal, int k) {
  if (k < 0 || k > seal.bit_count()) throw std::invalid_argument("k out of range");
  double log_success = 0.0, log_joint = 0.0, log_escape = 0.0;
  for (int i = 0; i < k; ++i) {
    double c2 = std::cos(seal.angle(i)) * std::cos(seal.angle(i));
    double s2 = 1.0 - c2;
    log_success += std::log(c2);
    log_joint += 2.0 * std::log(c2);
    log_escape += std::log(c2 * c2 + s2 * s2);
  }
  DetectionReport report{std::exp(log_escape), std::exp(log_joint), std::exp(log_success)};
  report.validate();
  return report;
}

}  // namespace qseal
