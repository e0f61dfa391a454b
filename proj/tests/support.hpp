#pragma once

// Shared helpers for the unit and acceptance suites: seeded generators for
// random stochastic matrices and pmfs, and an error-kind probe.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "labelnoise/confusion.hpp"
#include "labelnoise/error.hpp"
#include "labelnoise/pmf.hpp"
#include "labelnoise/rng.hpp"

namespace testsupport {

inline std::optional<labelnoise::ErrorKind> thrown_kind(
    const std::function<void()>& fn) {
  try {
    fn();
  } catch (const labelnoise::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

/// Random pmf with strictly positive masses.
inline labelnoise::DiscretePmf random_pmf(labelnoise::UniformRng& rng,
                                          std::size_t support) {
  std::vector<double> masses(support);
  double total = 0.0;
  for (double& m : masses) {
    m = 0.05 + rng.next();
    total += m;
  }
  for (double& m : masses) m /= total;
  return labelnoise::DiscretePmf(std::move(masses));
}

/// Random column-stochastic matrix with a boosted diagonal so it stays
/// comfortably invertible; retries on the rare singular draw.
inline labelnoise::ConfusionMatrix random_backward(labelnoise::UniformRng& rng,
                                                   std::size_t k) {
  for (;;) {
    Eigen::MatrixXd m(k, k);
    for (std::size_t j = 0; j < k; ++j) {
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double v = (i == j ? 1.0 : 0.0) + rng.next();
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        total += v;
      }
      m.col(static_cast<Eigen::Index>(j)) /= total;
    }
    try {
      return labelnoise::build_validated(m, labelnoise::Orientation::Backward);
    } catch (const labelnoise::Error&) {
      continue;
    }
  }
}

inline labelnoise::ConfusionMatrix random_forward(labelnoise::UniformRng& rng,
                                                  std::size_t k) {
  for (;;) {
    Eigen::MatrixXd m(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double v = (i == j ? 1.0 : 0.0) + rng.next();
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        total += v;
      }
      m.row(static_cast<Eigen::Index>(i)) /= total;
    }
    try {
      return labelnoise::build_validated(m, labelnoise::Orientation::Forward);
    } catch (const labelnoise::Error&) {
      continue;
    }
  }
}

/// The nominal GPS-speed annotator confusion (rows = truth).
inline Eigen::MatrixXd table_forward() {
  Eigen::MatrixXd m(3, 3);
  m << 0.76, 0.24, 0.0,
       0.28, 0.72, 0.0,
       0.0, 0.0, 1.0;
  return m;
}

}  // namespace testsupport
