#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>

#include "labelnoise/error.hpp"
#include "labelnoise/pmf.hpp"

namespace labelnoise {

/// Tolerance for row/column sums of stochastic matrices.
inline constexpr double kStochasticSumTolerance = 1e-9;

/// Absolute determinant below which a confusion matrix is treated as
/// singular. Fixed so behavior stays deterministic at the K <= 10 class
/// counts this library targets.
inline constexpr double kSingularDeterminant = 1e-12;

/// Max-norm residual allowed for cm * inverse(cm) - I.
inline constexpr double kInverseResidualTolerance = 1e-10;

/// Entries this close to {0, 1} classify a matrix as a permutation.
inline constexpr double kPermutationEntryTolerance = 1e-12;

/// Fixes how confusion entries are indexed:
///   Backward: entries(i, j) = Pr(y = s_i | weak = s_j); columns sum to one.
///   Forward:  entries(i, j) = Pr(weak = s_j | y = s_i); rows sum to one.
/// Density correction consumes Backward; posterior and loss correction
/// consume Forward. Cross-use throws, never silently transposes.
enum class Orientation { Backward, Forward };

inline const char* to_string(Orientation orientation) {
  return orientation == Orientation::Backward ? "backward" : "forward";
}

/// Validated K x K stochastic matrix tagged with its orientation.
class ConfusionMatrix {
 public:
  Orientation orientation() const noexcept { return orientation_; }
  std::size_t num_classes() const noexcept {
    return static_cast<std::size_t>(entries_.rows());
  }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  friend ConfusionMatrix build_validated(const Eigen::MatrixXd& raw,
                                         Orientation orientation);

 private:
  ConfusionMatrix(Eigen::MatrixXd entries, Orientation orientation)
      : entries_(std::move(entries)), orientation_(orientation) {}

  Eigen::MatrixXd entries_;
  Orientation orientation_;
};

struct ConfusionDiagnostics {
  double determinant = 0.0;
  double eigen_ratio = 1.0;      // lambda_max / lambda_min of inv * inv^T
  double log_eigen_ratio = 0.0;
  bool is_permutation = false;
};

/// Validates and wraps a raw matrix. Rejects non-stochastic input rather
/// than renormalizing; normalization is a separate, explicit operation.
inline ConfusionMatrix build_validated(const Eigen::MatrixXd& raw,
                                       Orientation orientation) {
  if (raw.rows() != raw.cols()) {
    std::ostringstream msg;
    msg << "confusion matrix must be square, got " << raw.rows() << "x"
        << raw.cols();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  if (raw.rows() < 2) {
    throw Error(ErrorKind::DimensionMismatch,
                "confusion matrix needs at least 2 classes");
  }
  const Eigen::Index k = raw.rows();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double v = raw(i, j);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "entry (" << i << "," << j << ") is not finite";
        throw Error(ErrorKind::NonStochastic, msg.str());
      }
      if (v < 0.0) {
        std::ostringstream msg;
        msg << "entry (" << i << "," << j << ") is " << v;
        throw Error(ErrorKind::NegativeEntry, msg.str());
      }
    }
  }
  for (Eigen::Index idx = 0; idx < k; ++idx) {
    const double sum = orientation == Orientation::Backward
                           ? raw.col(idx).sum()
                           : raw.row(idx).sum();
    if (std::abs(sum - 1.0) > kStochasticSumTolerance) {
      std::ostringstream msg;
      msg << (orientation == Orientation::Backward ? "column " : "row ") << idx
          << " sums to " << sum << ", expected 1 within "
          << kStochasticSumTolerance;
      throw Error(ErrorKind::NonStochastic, msg.str());
    }
  }
  const double det = Eigen::PartialPivLU<Eigen::MatrixXd>(raw).determinant();
  if (std::abs(det) < kSingularDeterminant) {
    std::ostringstream msg;
    msg << "determinant " << det << " below threshold " << kSingularDeterminant;
    throw Error(ErrorKind::Singular, msg.str());
  }
  return ConfusionMatrix(raw, orientation);
}

/// Column-normalizes a nonnegative count matrix into a Backward matrix.
inline ConfusionMatrix normalize_columns(const Eigen::MatrixXd& raw_counts) {
  if (raw_counts.rows() != raw_counts.cols() || raw_counts.rows() < 2) {
    std::ostringstream msg;
    msg << "count matrix must be square with K >= 2, got " << raw_counts.rows()
        << "x" << raw_counts.cols();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  const Eigen::Index k = raw_counts.rows();
  Eigen::MatrixXd normalized(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < k; ++i) {
      const double v = raw_counts(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream msg;
        msg << "count (" << i << "," << j << ") is " << v;
        throw Error(ErrorKind::NegativeEntry, msg.str());
      }
    }
    const double sum = raw_counts.col(j).sum();
    if (sum <= 0.0) {
      std::ostringstream msg;
      msg << "column " << j << " has zero total count";
      throw Error(ErrorKind::ZeroColumn, msg.str());
    }
    normalized.col(j) = raw_counts.col(j) / sum;
  }
  return build_validated(normalized, Orientation::Backward);
}

/// Inverse of the confusion matrix; rows/columns of the result may be
/// negative. Throws Singular if the residual check fails.
inline Eigen::MatrixXd invert(const ConfusionMatrix& cm) {
  const Eigen::MatrixXd& m = cm.entries();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  Eigen::MatrixXd inverse = lu.inverse();
  const double residual =
      (m * inverse - Eigen::MatrixXd::Identity(m.rows(), m.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (!(residual < kInverseResidualTolerance)) {
    std::ostringstream msg;
    msg << "inverse residual " << residual << " exceeds "
        << kInverseResidualTolerance;
    throw Error(ErrorKind::Singular, msg.str());
  }
  return inverse;
}

/// Determinant, permutation flag, and the eigenvalue ratio of inv * inv^T.
/// The product is symmetric positive definite for any invertible matrix, so
/// a self-adjoint solver suffices and the ratio is always >= 1.
inline ConfusionDiagnostics diagnostics(const ConfusionMatrix& cm) {
  ConfusionDiagnostics out;
  const Eigen::MatrixXd& m = cm.entries();
  out.determinant = Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();

  const Eigen::MatrixXd inverse = invert(cm);
  const Eigen::MatrixXd product = inverse * inverse.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(product);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::Singular, "eigendecomposition of inv*inv^T failed");
  }
  const auto& eigenvalues = solver.eigenvalues();
  const double lambda_min = eigenvalues(0);
  const double lambda_max = eigenvalues(eigenvalues.size() - 1);
  if (!(lambda_min > 0.0)) {
    std::ostringstream msg;
    msg << "minimal eigenvalue " << lambda_min << " is not positive";
    throw Error(ErrorKind::Singular, msg.str());
  }
  out.eigen_ratio = lambda_max / lambda_min;
  out.log_eigen_ratio = std::log(out.eigen_ratio);

  out.is_permutation = true;
  for (Eigen::Index i = 0; i < m.rows() && out.is_permutation; ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (std::abs(v) > kPermutationEntryTolerance &&
          std::abs(v - 1.0) > kPermutationEntryTolerance) {
        out.is_permutation = false;
        break;
      }
    }
  }
  return out;
}

/// Bayes bridge between the two matrix conventions:
///   backward(i, j) = forward(i, j) * prior[i] / sum_m forward(m, j) * prior[m].
inline ConfusionMatrix backward_from_forward(const ConfusionMatrix& forward,
                                             const DiscretePmf& prior) {
  if (forward.orientation() != Orientation::Forward) {
    throw Error(ErrorKind::WrongOrientation,
                "backward_from_forward requires a forward matrix");
  }
  const Eigen::Index k = static_cast<Eigen::Index>(forward.num_classes());
  if (prior.support_size() != forward.num_classes()) {
    std::ostringstream msg;
    msg << "prior has " << prior.support_size() << " classes, matrix has "
        << forward.num_classes();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  const Eigen::MatrixXd& f = forward.entries();
  Eigen::MatrixXd backward(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double weak_mass = 0.0;
    for (Eigen::Index m = 0; m < k; ++m) {
      weak_mass += f(m, j) * prior[static_cast<std::size_t>(m)];
    }
    if (weak_mass < 1e-12) {
      std::ostringstream msg;
      msg << "weak label " << j << " has marginal probability " << weak_mass;
      throw Error(ErrorKind::ZeroWeakLabelMass, msg.str());
    }
    for (Eigen::Index i = 0; i < k; ++i) {
      backward(i, j) = f(i, j) * prior[static_cast<std::size_t>(i)] / weak_mass;
    }
  }
  return build_validated(backward, Orientation::Backward);
}

/// 2x2 forward matrix over the label ordering (+1, -1) from the binary flip
/// rates kappa_plus = Pr(weak = -1 | y = +1), kappa_minus = Pr(weak = +1 |
/// y = -1). Invertible exactly when kappa_plus + kappa_minus != 1; a sum
/// above one is allowed (the inverse flips the decision).
inline ConfusionMatrix binary_from_kappas(double kappa_plus,
                                          double kappa_minus) {
  if (!(kappa_plus >= 0.0 && kappa_plus <= 1.0) ||
      !(kappa_minus >= 0.0 && kappa_minus <= 1.0)) {
    throw std::invalid_argument("binary_from_kappas: rates must lie in [0, 1]");
  }
  const double det = 1.0 - kappa_plus - kappa_minus;
  if (std::abs(det) < kSingularDeterminant) {
    std::ostringstream msg;
    msg << "kappa_plus + kappa_minus = " << kappa_plus + kappa_minus
        << " makes the matrix singular";
    throw Error(ErrorKind::Singular, msg.str());
  }
  Eigen::MatrixXd f(2, 2);
  f << 1.0 - kappa_plus, kappa_plus, kappa_minus, 1.0 - kappa_minus;
  return build_validated(f, Orientation::Forward);
}

}  // namespace labelnoise
