#pragma once

#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "labelnoise/confusion.hpp"
#include "labelnoise/error.hpp"
#include "labelnoise/pmf.hpp"

namespace labelnoise {

struct WeakSample {
  std::uint32_t x = 0;           // support symbol index in [0, S)
  std::uint32_t weak_label = 0;  // weak class index in [0, K)
};

inline bool operator==(const WeakSample& a, const WeakSample& b) {
  return a.x == b.x && a.weak_label == b.weak_label;
}

/// The only training evidence: pairs (x, weak label) with declared support
/// and class counts.
class WeakDataset {
 public:
  WeakDataset(std::vector<WeakSample> samples, std::size_t support_size,
              std::size_t num_classes)
      : samples_(std::move(samples)),
        support_size_(support_size),
        num_classes_(num_classes) {
    if (support_size_ == 0 || num_classes_ == 0) {
      throw Error(ErrorKind::DimensionMismatch,
                  "support size and class count must be positive");
    }
    for (std::size_t n = 0; n < samples_.size(); ++n) {
      if (samples_[n].x >= support_size_) {
        std::ostringstream msg;
        msg << "sample " << n << " has x = " << samples_[n].x
            << ", support size " << support_size_;
        throw Error(ErrorKind::DimensionMismatch, msg.str());
      }
      if (samples_[n].weak_label >= num_classes_) {
        std::ostringstream msg;
        msg << "sample " << n << " has weak label " << samples_[n].weak_label
            << ", class count " << num_classes_;
        throw Error(ErrorKind::DimensionMismatch, msg.str());
      }
    }
  }

  const std::vector<WeakSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  std::size_t support_size() const noexcept { return support_size_; }
  std::size_t num_classes() const noexcept { return num_classes_; }

 private:
  std::vector<WeakSample> samples_;
  std::size_t support_size_;
  std::size_t num_classes_;
};

/// Per-weak-class empirical conditionals with additive smoothing:
///   q(x = a | weak = j) = (count(a, j) + smoothing) / (n_j + S * smoothing).
inline std::vector<DiscretePmf> empirical_conditionals(const WeakDataset& data,
                                                       double smoothing) {
  if (!(smoothing >= 0.0)) {
    throw std::invalid_argument("empirical_conditionals: smoothing must be >= 0");
  }
  const std::size_t support = data.support_size();
  const std::size_t classes = data.num_classes();
  std::vector<std::vector<double>> counts(classes,
                                          std::vector<double>(support, 0.0));
  std::vector<std::size_t> per_class(classes, 0);
  for (const WeakSample& s : data.samples()) {
    counts[s.weak_label][s.x] += 1.0;
    ++per_class[s.weak_label];
  }
  std::vector<DiscretePmf> out;
  out.reserve(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    if (per_class[j] == 0 && smoothing == 0.0) {
      std::ostringstream msg;
      msg << "weak class " << j << " has no samples and smoothing is zero";
      throw Error(ErrorKind::EmptyWeakClass, msg.str());
    }
    const double denom = static_cast<double>(per_class[j]) +
                         static_cast<double>(support) * smoothing;
    std::vector<double> masses(support);
    for (std::size_t a = 0; a < support; ++a) {
      masses[a] = (counts[j][a] + smoothing) / denom;
    }
    out.emplace_back(std::move(masses));
  }
  return out;
}

namespace detail {

inline void require_uniform_support(const std::vector<DiscretePmf>& pmfs) {
  for (std::size_t j = 1; j < pmfs.size(); ++j) {
    if (pmfs[j].support_size() != pmfs[0].support_size()) {
      std::ostringstream msg;
      msg << "pmf " << j << " has support " << pmfs[j].support_size()
          << ", pmf 0 has " << pmfs[0].support_size();
      throw Error(ErrorKind::DimensionMismatch, msg.str());
    }
  }
}

}  // namespace detail

/// Noise-corrected conditional estimates: for each true class i,
///   corrected_i(x) = sum_j weak_j(x) * inv(backward)(j, i).
/// Each output sums to one but may be negative; project before using as a
/// pmf. Re-mixing the outputs by the backward matrix reproduces the inputs.
inline std::vector<SignedMeasure> correct_densities(
    const std::vector<DiscretePmf>& weak_pmfs, const ConfusionMatrix& backward) {
  if (backward.orientation() != Orientation::Backward) {
    throw Error(ErrorKind::WrongOrientation,
                "correct_densities requires a backward matrix");
  }
  if (weak_pmfs.size() != backward.num_classes()) {
    std::ostringstream msg;
    msg << "got " << weak_pmfs.size() << " weak pmfs for "
        << backward.num_classes() << " classes";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  detail::require_uniform_support(weak_pmfs);

  const Eigen::MatrixXd inverse = invert(backward);
  const std::size_t classes = weak_pmfs.size();
  const std::size_t support = weak_pmfs[0].support_size();
  std::vector<SignedMeasure> out;
  out.reserve(classes);
  for (std::size_t i = 0; i < classes; ++i) {
    std::vector<double> values(support, 0.0);
    for (std::size_t j = 0; j < classes; ++j) {
      const double weight = inverse(static_cast<Eigen::Index>(j),
                                    static_cast<Eigen::Index>(i));
      const std::vector<double>& weak = weak_pmfs[j].masses();
      for (std::size_t a = 0; a < support; ++a) {
        values[a] += weak[a] * weight;
      }
    }
    out.emplace_back(std::move(values));
  }
  return out;
}

/// Posterior correction: row vector of weak posteriors times the inverse of
/// the forward (right stochastic) matrix.
inline SignedMeasure correct_posterior(const DiscretePmf& weak_posterior,
                                       const ConfusionMatrix& forward) {
  if (forward.orientation() != Orientation::Forward) {
    throw Error(ErrorKind::WrongOrientation,
                "correct_posterior requires a forward matrix");
  }
  if (weak_posterior.support_size() != forward.num_classes()) {
    std::ostringstream msg;
    msg << "posterior has " << weak_posterior.support_size()
        << " classes, matrix has " << forward.num_classes();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  const Eigen::MatrixXd inverse = invert(forward);
  const std::size_t classes = forward.num_classes();
  std::vector<double> values(classes, 0.0);
  for (std::size_t j = 0; j < classes; ++j) {
    for (std::size_t i = 0; i < classes; ++i) {
      values[j] += weak_posterior[i] * inverse(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j));
    }
  }
  return SignedMeasure(std::move(values));
}

/// Mixes true conditionals through a backward matrix (the generative
/// direction): weak_j(x) = sum_i true_i(x) * backward(i, j). Useful for
/// building exact weak conditionals in tests and oracles.
inline std::vector<DiscretePmf> mix_densities(
    const std::vector<DiscretePmf>& true_pmfs, const ConfusionMatrix& backward) {
  if (backward.orientation() != Orientation::Backward) {
    throw Error(ErrorKind::WrongOrientation,
                "mix_densities requires a backward matrix");
  }
  if (true_pmfs.size() != backward.num_classes()) {
    std::ostringstream msg;
    msg << "got " << true_pmfs.size() << " pmfs for " << backward.num_classes()
        << " classes";
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  detail::require_uniform_support(true_pmfs);
  const std::size_t classes = true_pmfs.size();
  const std::size_t support = true_pmfs[0].support_size();
  std::vector<DiscretePmf> out;
  out.reserve(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    std::vector<double> masses(support, 0.0);
    for (std::size_t i = 0; i < classes; ++i) {
      const double weight = backward(i, j);
      const std::vector<double>& truth = true_pmfs[i].masses();
      for (std::size_t a = 0; a < support; ++a) {
        masses[a] += truth[a] * weight;
      }
    }
    out.emplace_back(std::move(masses));
  }
  return out;
}

}  // namespace labelnoise
