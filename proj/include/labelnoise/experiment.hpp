#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "labelnoise/confusion.hpp"
#include "labelnoise/density.hpp"
#include "labelnoise/error.hpp"
#include "labelnoise/parallel.hpp"
#include "labelnoise/pmf.hpp"
#include "labelnoise/rng.hpp"

namespace labelnoise {

/// Configuration of the synthetic convergence study: binomial classes mixed
/// through an equal-diagonal forward matrix, swept over sample sizes and
/// noise levels.
struct SyntheticConfig {
  int binomial_trials = 20;
  std::vector<double> success_params = {0.52, 0.65, 0.08};
  std::vector<double> class_prior = {};  // empty means uniform
  std::vector<std::size_t> sample_sizes = {1000, 3000, 10000, 30000, 100000};
  std::vector<double> noise_levels = {0.95, 0.9, 0.8, 0.7, 0.6};
  std::size_t runs_per_cell = 2000;
  std::uint64_t base_seed = 12345;
  double smoothing = 0.5;
  Projection projection = Projection::ClipRenormalize;

  std::size_t num_classes() const { return success_params.size(); }

  DiscretePmf prior() const {
    if (class_prior.empty()) return DiscretePmf::uniform(num_classes());
    return DiscretePmf(class_prior);
  }

  std::vector<DiscretePmf> true_conditionals() const {
    std::vector<DiscretePmf> out;
    out.reserve(num_classes());
    for (double p : success_params) out.push_back(binomial_pmf(binomial_trials, p));
    return out;
  }
};

/// Symmetric doubly stochastic forward matrix with diagonal d and
/// off-diagonal (1 - d) / (K - 1). Singular exactly at d = 1/K.
inline ConfusionMatrix equal_diag_matrix(std::size_t num_classes, double d) {
  if (num_classes < 2) {
    throw Error(ErrorKind::DimensionMismatch,
                "equal_diag_matrix needs at least 2 classes");
  }
  if (!(d >= 0.0 && d <= 1.0)) {
    throw std::invalid_argument("equal_diag_matrix: d must lie in [0, 1]");
  }
  const Eigen::Index k = static_cast<Eigen::Index>(num_classes);
  const double off = (1.0 - d) / static_cast<double>(num_classes - 1);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(k, k, off);
  m.diagonal().setConstant(d);
  return build_validated(m, Orientation::Forward);  // Singular at d = 1/K
}

/// Fail-fast validation of a sweep configuration; every noise level must
/// yield an invertible matrix before any trial runs.
inline void validate(const SyntheticConfig& cfg) {
  if (cfg.binomial_trials < 1) {
    throw Error(ErrorKind::ParseError, "binomial_trials must be >= 1");
  }
  if (cfg.num_classes() < 2) {
    throw Error(ErrorKind::ParseError, "success_params needs >= 2 entries");
  }
  for (double p : cfg.success_params) {
    if (!(p >= 0.0 && p <= 1.0)) {
      std::ostringstream msg;
      msg << "success parameter " << p << " outside [0, 1]";
      throw Error(ErrorKind::ParseError, msg.str());
    }
  }
  if (!cfg.class_prior.empty()) {
    if (cfg.class_prior.size() != cfg.num_classes()) {
      throw Error(ErrorKind::ParseError,
                  "class_prior length must match success_params");
    }
    for (double p : cfg.class_prior) {
      if (!(p > 0.0)) {
        throw Error(ErrorKind::ParseError, "class_prior must be strictly positive");
      }
    }
    DiscretePmf check(cfg.class_prior);  // sums-to-one check
  }
  if (cfg.sample_sizes.empty()) {
    throw Error(ErrorKind::ParseError, "sample_sizes must be nonempty");
  }
  if (cfg.noise_levels.empty()) {
    throw Error(ErrorKind::ParseError, "noise_levels must be nonempty");
  }
  if (cfg.runs_per_cell == 0) {
    throw Error(ErrorKind::ParseError, "runs_per_cell must be >= 1");
  }
  if (!(cfg.smoothing >= 0.0)) {
    throw Error(ErrorKind::ParseError, "smoothing must be >= 0");
  }
  for (double d : cfg.noise_levels) {
    equal_diag_matrix(cfg.num_classes(), d);  // throws Singular at d = 1/K
  }
}

/// One synthetic dataset: y ~ prior, x ~ Binomial(m, p_y), weak label ~
/// row y of the forward matrix. Deterministic given the seed.
inline WeakDataset generate_trial(const SyntheticConfig& cfg, std::size_t n,
                                  double d, std::uint64_t seed) {
  const ConfusionMatrix forward = equal_diag_matrix(cfg.num_classes(), d);
  const DiscretePmf prior = cfg.prior();
  const std::vector<DiscretePmf> truths = cfg.true_conditionals();
  const std::size_t classes = cfg.num_classes();

  std::vector<std::vector<double>> forward_rows(classes);
  for (std::size_t i = 0; i < classes; ++i) {
    forward_rows[i].resize(classes);
    for (std::size_t j = 0; j < classes; ++j) forward_rows[i][j] = forward(i, j);
  }

  UniformRng rng(seed);
  std::vector<WeakSample> samples;
  samples.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t y = sample_index(rng, prior.masses());
    const std::size_t x = sample_index(rng, truths[y].masses());
    const std::size_t weak = sample_index(rng, forward_rows[y]);
    samples.push_back({static_cast<std::uint32_t>(x),
                       static_cast<std::uint32_t>(weak)});
  }
  return WeakDataset(std::move(samples),
                     static_cast<std::size_t>(cfg.binomial_trials) + 1, classes);
}

struct TrialResult {
  std::size_t n = 0;
  double d = 1.0;
  double log_eigen_ratio = 0.0;
  double sum_kl_corrected = 0.0;
  double sum_kl_uncorrected = 0.0;
  std::uint64_t seed = 0;
};

/// Runs one trial: estimate the weak conditionals, correct through the
/// Bayes-derived backward matrix, project, and score both the corrected and
/// the uncorrected estimates against the analytic truths.
inline TrialResult run_trial(const SyntheticConfig& cfg, std::size_t n, double d,
                             std::size_t trial_index) {
  const ConfusionMatrix forward = equal_diag_matrix(cfg.num_classes(), d);
  const ConfusionMatrix backward = backward_from_forward(forward, cfg.prior());
  const ConfusionDiagnostics diag = diagnostics(backward);
  const std::vector<DiscretePmf> truths = cfg.true_conditionals();

  TrialResult result;
  result.n = n;
  result.d = d;
  result.log_eigen_ratio = diag.log_eigen_ratio;
  result.seed = derive_seed(cfg.base_seed, n, d, trial_index);

  const WeakDataset data = generate_trial(cfg, n, d, result.seed);
  const std::vector<DiscretePmf> weak = empirical_conditionals(data, cfg.smoothing);
  const std::vector<SignedMeasure> corrected = correct_densities(weak, backward);
  std::vector<DiscretePmf> estimates;
  estimates.reserve(corrected.size());
  for (const SignedMeasure& sm : corrected) {
    estimates.push_back(project_to_pmf(sm, cfg.projection));
  }
  result.sum_kl_corrected = sum_kl(truths, estimates);
  // Baseline: score the raw weak conditionals index-wise against the truths.
  result.sum_kl_uncorrected = sum_kl(truths, weak);
  return result;
}

struct CellResult {
  std::size_t n = 0;
  double d = 1.0;
  double log_eigen_ratio = 0.0;
  double mean_kl_corrected = 0.0;
  double std_kl_corrected = 0.0;
  double mean_kl_uncorrected = 0.0;
  double std_kl_uncorrected = 0.0;
  std::size_t runs = 0;
  std::uint64_t base_seed = 0;
};

namespace detail {

// Mean and sample standard deviation reduced in slot order, so results do
// not depend on which worker finished first.
inline std::pair<double, double> mean_std(const std::vector<double>& values) {
  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (count - 1.0))};
}

}  // namespace detail

/// Aggregates runs_per_cell independent trials at one (n, d) cell. Trial
/// seeds derive from (base_seed, n, d, trial), so any worker count produces
/// identical results.
inline CellResult run_cell(const SyntheticConfig& cfg, std::size_t n, double d,
                           unsigned workers = 1) {
  const std::size_t runs = cfg.runs_per_cell;
  if (runs == 0) {
    throw Error(ErrorKind::ParseError, "runs_per_cell must be >= 1");
  }
  const ConfusionMatrix forward = equal_diag_matrix(cfg.num_classes(), d);
  const ConfusionMatrix backward = backward_from_forward(forward, cfg.prior());
  const ConfusionDiagnostics diag = diagnostics(backward);

  std::vector<double> corrected(runs, 0.0);
  std::vector<double> uncorrected(runs, 0.0);
  parallel_for(runs, workers, [&](std::size_t t) {
    const TrialResult r = run_trial(cfg, n, d, t);
    corrected[t] = r.sum_kl_corrected;
    uncorrected[t] = r.sum_kl_uncorrected;
  });

  CellResult cell;
  cell.n = n;
  cell.d = d;
  cell.log_eigen_ratio = diag.log_eigen_ratio;
  std::tie(cell.mean_kl_corrected, cell.std_kl_corrected) =
      detail::mean_std(corrected);
  std::tie(cell.mean_kl_uncorrected, cell.std_kl_uncorrected) =
      detail::mean_std(uncorrected);
  cell.runs = runs;
  cell.base_seed = cfg.base_seed;
  return cell;
}

/// Full cartesian sweep over sample_sizes x noise_levels.
inline std::vector<CellResult> run_sweep(const SyntheticConfig& cfg,
                                         unsigned workers = 1) {
  validate(cfg);
  std::vector<CellResult> cells;
  cells.reserve(cfg.sample_sizes.size() * cfg.noise_levels.size());
  for (std::size_t n : cfg.sample_sizes) {
    for (double d : cfg.noise_levels) {
      cells.push_back(run_cell(cfg, n, d, workers));
    }
  }
  return cells;
}

/// Ordinary least-squares slope of log(value) against log(n).
inline double fit_loglog_slope(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw Error(ErrorKind::DegenerateFit, "need at least 3 points");
  }
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      std::ostringstream msg;
      msg << "point (" << x << ", " << y << ") is not strictly positive";
      throw Error(ErrorKind::DegenerateFit, msg.str());
    }
    mean_x += std::log(x);
    mean_y += std::log(y);
  }
  mean_x /= static_cast<double>(points.size());
  mean_y /= static_cast<double>(points.size());
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - mean_y);
  }
  if (sxx <= 0.0) {
    throw Error(ErrorKind::DegenerateFit, "all sample sizes are equal");
  }
  return sxy / sxx;
}

/// Formats with 9 significant digits, matching the results-CSV contract.
inline std::string format_sig9(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return std::string(buffer);
}

inline constexpr const char* kResultsCsvHeader =
    "n,d,log_eigen_ratio,mean_kl_corrected,std_kl_corrected,"
    "mean_kl_uncorrected,std_kl_uncorrected,runs,base_seed";

/// Writes one row per (n, d) cell; numbers carry 9 significant digits.
inline void write_results_csv(const std::vector<CellResult>& cells,
                              const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  }
  out << kResultsCsvHeader << "\n";
  for (const CellResult& cell : cells) {
    out << cell.n << ',' << format_sig9(cell.d) << ','
        << format_sig9(cell.log_eigen_ratio) << ','
        << format_sig9(cell.mean_kl_corrected) << ','
        << format_sig9(cell.std_kl_corrected) << ','
        << format_sig9(cell.mean_kl_uncorrected) << ','
        << format_sig9(cell.std_kl_uncorrected) << ',' << cell.runs << ','
        << cell.base_seed << "\n";
  }
  if (!out) {
    throw Error(ErrorKind::IoError, "write to " + path.string() + " failed");
  }
}

}  // namespace labelnoise
