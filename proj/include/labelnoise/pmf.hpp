#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "labelnoise/error.hpp"

namespace labelnoise {

/// Tolerance for "sums to one" checks on pmfs and signed measures.
inline constexpr double kMassSumTolerance = 1e-9;

/// Floor applied to the denominator inside KL terms so empty estimate cells
/// stay finite.
inline constexpr double kKlLogFloor = 1e-12;

/// Divergences above this many nats are dominated by the log floor rather
/// than by real discrepancy.
inline constexpr double kKlFloorDominatedNats = 25.0;

inline bool kl_floor_dominated(double nats) {
  return nats > kKlFloorDominatedNats;
}

namespace detail {

inline double sum_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

inline void require_unit_sum(const std::vector<double>& v, double tol,
                             const char* what) {
  const double total = sum_of(v);
  if (!(std::abs(total - 1.0) <= tol)) {
    std::ostringstream msg;
    msg << what << " sums to " << total << ", expected 1 within " << tol;
    throw Error(ErrorKind::NonStochastic, msg.str());
  }
}

}  // namespace detail

/// Probability mass function over a finite support {0, ..., S-1}.
class DiscretePmf {
 public:
  explicit DiscretePmf(std::vector<double> masses) : masses_(std::move(masses)) {
    if (masses_.empty()) {
      throw Error(ErrorKind::DimensionMismatch, "pmf support must be nonempty");
    }
    for (std::size_t a = 0; a < masses_.size(); ++a) {
      if (!std::isfinite(masses_[a])) {
        std::ostringstream msg;
        msg << "pmf mass at index " << a << " is not finite";
        throw Error(ErrorKind::NonStochastic, msg.str());
      }
      if (masses_[a] < 0.0) {
        std::ostringstream msg;
        msg << "pmf mass at index " << a << " is " << masses_[a];
        throw Error(ErrorKind::NegativeEntry, msg.str());
      }
    }
    detail::require_unit_sum(masses_, kMassSumTolerance, "pmf");
  }

  static DiscretePmf uniform(std::size_t support_size) {
    if (support_size == 0) {
      throw Error(ErrorKind::DimensionMismatch, "pmf support must be nonempty");
    }
    return DiscretePmf(
        std::vector<double>(support_size, 1.0 / static_cast<double>(support_size)));
  }

  const std::vector<double>& masses() const noexcept { return masses_; }
  std::size_t support_size() const noexcept { return masses_.size(); }
  double operator[](std::size_t index) const { return masses_.at(index); }

 private:
  std::vector<double> masses_;
};

/// Output of a confusion-matrix correction: coordinates sum to one but may
/// be negative, so it is not yet a pmf.
class SignedMeasure {
 public:
  explicit SignedMeasure(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw Error(ErrorKind::DimensionMismatch, "signed measure must be nonempty");
    }
    for (std::size_t a = 0; a < values_.size(); ++a) {
      if (!std::isfinite(values_[a])) {
        std::ostringstream msg;
        msg << "signed measure value at index " << a << " is not finite";
        throw Error(ErrorKind::NonStochastic, msg.str());
      }
    }
    detail::require_unit_sum(values_, kMassSumTolerance, "signed measure");
  }

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t index) const { return values_.at(index); }
  double min_value() const {
    return *std::min_element(values_.begin(), values_.end());
  }

 private:
  std::vector<double> values_;
};

/// Binomial(trials, success) as a pmf over {0, ..., trials}. Uses the
/// multiplicative recurrence, which is stable for the small trial counts
/// used here, and normalizes the final sum exactly.
inline DiscretePmf binomial_pmf(int trials, double success) {
  if (trials < 1) {
    throw std::invalid_argument("binomial_pmf: trials must be >= 1");
  }
  if (!(success >= 0.0 && success <= 1.0)) {
    throw std::invalid_argument("binomial_pmf: success must lie in [0, 1]");
  }
  const std::size_t support = static_cast<std::size_t>(trials) + 1;
  std::vector<double> masses(support, 0.0);
  if (success == 0.0) {
    masses.front() = 1.0;
    return DiscretePmf(std::move(masses));
  }
  if (success == 1.0) {
    masses.back() = 1.0;
    return DiscretePmf(std::move(masses));
  }
  const double odds = success / (1.0 - success);
  masses[0] = std::pow(1.0 - success, trials);
  for (std::size_t a = 1; a < support; ++a) {
    masses[a] = masses[a - 1] * odds *
                static_cast<double>(support - a) / static_cast<double>(a);
  }
  const double total = detail::sum_of(masses);
  for (double& m : masses) m /= total;
  return DiscretePmf(std::move(masses));
}

/// D_KL(p || q) in nats with the 1e-12 denominator floor. Terms with
/// p[a] == 0 contribute nothing; the result can dip to -1e-12 numerically
/// but is never clamped.
inline double kl_divergence(const DiscretePmf& p, const DiscretePmf& q) {
  if (p.support_size() != q.support_size()) {
    std::ostringstream msg;
    msg << "kl_divergence: supports differ (" << p.support_size() << " vs "
        << q.support_size() << ")";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  double total = 0.0;
  for (std::size_t a = 0; a < p.support_size(); ++a) {
    const double pa = p[a];
    if (pa <= 0.0) continue;
    total += pa * (std::log(pa) - std::log(std::max(q[a], kKlLogFloor)));
  }
  return total;
}

/// Sum of per-class KL divergences between two families of conditionals.
inline double sum_kl(const std::vector<DiscretePmf>& true_pmfs,
                     const std::vector<DiscretePmf>& est_pmfs) {
  if (true_pmfs.size() != est_pmfs.size()) {
    std::ostringstream msg;
    msg << "sum_kl: class counts differ (" << true_pmfs.size() << " vs "
        << est_pmfs.size() << ")";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  double total = 0.0;
  for (std::size_t i = 0; i < true_pmfs.size(); ++i) {
    total += kl_divergence(true_pmfs[i], est_pmfs[i]);
  }
  return total;
}

enum class Projection {
  ClipRenormalize,
  EuclideanSimplex,
};

namespace detail {

inline std::vector<double> clip_renormalize(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t a = 0; a < values.size(); ++a) {
    out[a] = std::max(values[a], 0.0);
    total += out[a];
  }
  if (total <= 0.0) {
    throw Error(ErrorKind::AllNonPositive,
                "clipping left zero total mass; nothing to renormalize");
  }
  for (double& v : out) v /= total;
  return out;
}

// L2-nearest point of the probability simplex: subtract the threshold tau
// determined from the sorted prefix sums, then clip.
inline std::vector<double> simplex_project(const std::vector<double>& values) {
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  std::size_t active = 0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate =
        (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) {
      tau = candidate;
      active = j + 1;
    }
  }
  if (active == 0) {
    throw Error(ErrorKind::AllNonPositive,
                "simplex projection found no active coordinate");
  }
  std::vector<double> out(values.size());
  for (std::size_t a = 0; a < values.size(); ++a) {
    out[a] = std::max(values[a] - tau, 0.0);
  }
  return out;
}

}  // namespace detail

/// Project raw correction values (which must already sum to one within 1e-6)
/// onto the probability simplex.
inline DiscretePmf project_to_pmf(const std::vector<double>& values,
                                  Projection method) {
  const double total = detail::sum_of(values);
  if (!(std::abs(total - 1.0) <= 1e-6)) {
    std::ostringstream msg;
    msg << "projection input sums to " << total << ", expected 1 within 1e-6";
    throw Error(ErrorKind::NonStochastic, msg.str());
  }
  switch (method) {
    case Projection::ClipRenormalize:
      return DiscretePmf(detail::clip_renormalize(values));
    case Projection::EuclideanSimplex:
      return DiscretePmf(detail::simplex_project(values));
  }
  throw std::logic_error("unreachable projection method");
}

inline DiscretePmf project_to_pmf(const SignedMeasure& measure,
                                  Projection method) {
  return project_to_pmf(measure.values(), method);
}

}  // namespace labelnoise
