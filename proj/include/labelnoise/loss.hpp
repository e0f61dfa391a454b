#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "labelnoise/confusion.hpp"
#include "labelnoise/error.hpp"

namespace labelnoise {

namespace detail {

inline void require_finite_losses(const std::vector<double>& losses) {
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!std::isfinite(losses[i])) {
      std::ostringstream msg;
      msg << "loss value at index " << i << " is not finite";
      throw Error(ErrorKind::NonStochastic, msg.str());
    }
  }
}

}  // namespace detail

/// Unbiased multiclass loss correction: solves forward * corrected = clean,
/// so that the weak-label expectation of the corrected loss equals the clean
/// loss for every true class.
inline std::vector<double> correct_loss_multiclass(
    const std::vector<double>& clean_losses, const ConfusionMatrix& forward) {
  if (forward.orientation() != Orientation::Forward) {
    throw Error(ErrorKind::WrongOrientation,
                "correct_loss_multiclass requires a forward matrix");
  }
  if (clean_losses.size() != forward.num_classes()) {
    std::ostringstream msg;
    msg << "loss vector has " << clean_losses.size() << " entries, matrix has "
        << forward.num_classes() << " classes";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  detail::require_finite_losses(clean_losses);

  const Eigen::Index k = static_cast<Eigen::Index>(clean_losses.size());
  Eigen::VectorXd clean(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    clean(i) = clean_losses[static_cast<std::size_t>(i)];
  }
  const Eigen::MatrixXd inverse = invert(forward);  // Singular propagates
  const Eigen::VectorXd corrected = inverse * clean;
  return std::vector<double>(corrected.data(), corrected.data() + k);
}

/// Binary special case with flip rates kappa_plus = Pr(weak = -1 | y = +1),
/// kappa_minus = Pr(weak = +1 | y = -1):
///   corrected_pos = ((1 - k-) * loss_pos - k+ * loss_neg) / (1 - k+ - k-)
/// and symmetrically for corrected_neg. Finite (with a sign flip in the
/// denominator) whenever kappa_plus + kappa_minus != 1.
inline std::pair<double, double> correct_loss_binary(double loss_pos,
                                                     double loss_neg,
                                                     double kappa_plus,
                                                     double kappa_minus) {
  if (!(kappa_plus >= 0.0 && kappa_plus <= 1.0) ||
      !(kappa_minus >= 0.0 && kappa_minus <= 1.0)) {
    throw std::invalid_argument("correct_loss_binary: rates must lie in [0, 1]");
  }
  detail::require_finite_losses({loss_pos, loss_neg});
  const double denom = 1.0 - kappa_plus - kappa_minus;
  if (std::abs(denom) < kSingularDeterminant) {
    std::ostringstream msg;
    msg << "kappa_plus + kappa_minus = " << kappa_plus + kappa_minus
        << " makes the correction singular";
    throw Error(ErrorKind::Singular, msg.str());
  }
  const double corrected_pos =
      ((1.0 - kappa_minus) * loss_pos - kappa_plus * loss_neg) / denom;
  const double corrected_neg =
      ((1.0 - kappa_plus) * loss_neg - kappa_minus * loss_pos) / denom;
  return {corrected_pos, corrected_neg};
}

/// Brute-force expectation of a corrected loss over the weak label given the
/// true class: sum_j Pr(weak = s_j | y = true) * corrected[j]. Used to test
/// unbiasedness.
inline double expected_weak_loss(const std::vector<double>& corrected,
                                 const ConfusionMatrix& forward,
                                 std::size_t true_label) {
  if (forward.orientation() != Orientation::Forward) {
    throw Error(ErrorKind::WrongOrientation,
                "expected_weak_loss requires a forward matrix");
  }
  if (corrected.size() != forward.num_classes()) {
    std::ostringstream msg;
    msg << "loss vector has " << corrected.size() << " entries, matrix has "
        << forward.num_classes() << " classes";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  if (true_label >= forward.num_classes()) {
    std::ostringstream msg;
    msg << "true label " << true_label << " out of range for "
        << forward.num_classes() << " classes";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  double expectation = 0.0;
  for (std::size_t j = 0; j < corrected.size(); ++j) {
    expectation += forward(true_label, j) * corrected[j];
  }
  return expectation;
}

}  // namespace labelnoise
