#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "labelnoise/confusion.hpp"
#include "labelnoise/density.hpp"
#include "labelnoise/error.hpp"
#include "labelnoise/pmf.hpp"
#include "labelnoise/rng.hpp"

namespace labelnoise {

// Activity classes: 0 = call/fidget, 1 = slow walk, 2 = bike.
inline constexpr std::size_t kActivityClasses = 3;
inline constexpr std::size_t kFeatureAlphabet = 16;

/// Per-class generative classifier: Dirichlet pseudo-counts over the feature
/// alphabet plus a class prior. Updates return a new model.
class DirichletCategoricalModel {
 public:
  DirichletCategoricalModel(std::vector<std::vector<double>> concentrations,
                            DiscretePmf class_prior)
      : concentrations_(std::move(concentrations)),
        class_prior_(std::move(class_prior)) {
    if (concentrations_.empty() ||
        concentrations_.size() != class_prior_.support_size()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "concentration count must match the class prior");
    }
    const std::size_t support = concentrations_.front().size();
    for (std::size_t i = 0; i < concentrations_.size(); ++i) {
      if (concentrations_[i].size() != support || support == 0) {
        throw Error(ErrorKind::DimensionMismatch,
                    "concentration vectors must share a nonempty alphabet");
      }
      double total = 0.0;
      for (double c : concentrations_[i]) {
        if (!(c >= 0.0)) {
          std::ostringstream msg;
          msg << "class " << i << " has a negative pseudo-count";
          throw Error(ErrorKind::NegativeEntry, msg.str());
        }
        total += c;
      }
      if (!(total > 0.0)) {
        std::ostringstream msg;
        msg << "class " << i << " has zero total pseudo-count";
        throw Error(ErrorKind::AllNonPositive, msg.str());
      }
    }
  }

  std::size_t num_classes() const noexcept { return concentrations_.size(); }
  std::size_t alphabet_size() const noexcept {
    return concentrations_.front().size();
  }
  const std::vector<std::vector<double>>& concentrations() const noexcept {
    return concentrations_;
  }
  const DiscretePmf& class_prior() const noexcept { return class_prior_; }

  /// Posterior-mean emission probability for class i at symbol x.
  double emission(std::size_t class_index, std::size_t symbol) const {
    const std::vector<double>& c = concentrations_.at(class_index);
    double total = 0.0;
    for (double v : c) total += v;
    return c.at(symbol) / total;
  }

  double total_pseudo_count() const {
    double total = 0.0;
    for (const auto& c : concentrations_)
      for (double v : c) total += v;
    return total;
  }

 private:
  std::vector<std::vector<double>> concentrations_;
  DiscretePmf class_prior_;
};

/// Threshold annotator on GPS speed (mph). Returns the weak class, or
/// nothing when the reading falls in the (1, 3] gap or above 25.
inline std::optional<std::uint32_t> speed_annotator(double speed_mph) {
  if (!(speed_mph >= 0.0)) {
    throw std::invalid_argument("speed_annotator: speed must be >= 0");
  }
  if (speed_mph <= 0.1) return 0;   // call/fidget: [0, 0.1]
  if (speed_mph <= 1.0) return 1;   // slow walk: (0.1, 1]
  if (speed_mph <= 3.0) return std::nullopt;  // gap: (1, 3]
  if (speed_mph <= 25.0) return 2;  // bike: (3, 25]
  return std::nullopt;
}

/// Nominal confusion statistics of the speed annotator (rows = truth).
inline ConfusionMatrix speed_annotator_confusion() {
  Eigen::MatrixXd m(3, 3);
  m << 0.76, 0.24, 0.0,
       0.28, 0.72, 0.0,
       0.0, 0.0, 1.0;
  return build_validated(m, Orientation::Forward);
}

/// Uniform speed band per class (mph).
struct SpeedBand {
  double lo = 0.0;
  double hi = 0.0;
};

/// Default speed models, chosen so the induced annotator confusion matches
/// the nominal statistics: call/fidget crosses the 0.1 mph threshold with
/// mass 0.1/0.13, slow walk with mass 0.28, bike stays inside (3, 25].
inline std::vector<SpeedBand> default_speed_models() {
  return {{0.0, 0.13}, {0.0, 0.1 / 0.28}, {4.0, 20.0}};
}

/// Default per-class emission truths for the simulated user: binomial bumps
/// centered apart on the 16-symbol alphabet.
inline std::vector<DiscretePmf> default_user_emissions() {
  return {binomial_pmf(15, 0.1), binomial_pmf(15, 0.5), binomial_pmf(15, 0.9)};
}

struct AnnotatedSample {
  std::uint32_t x = 0;
  double speed = 0.0;
  std::uint32_t true_label = 0;  // held out for evaluation only
};

struct Segment {
  std::uint32_t label = 0;
  std::size_t count = 0;
};

/// Simulated user trace: per segment, draws feature symbols from the class
/// emission and a speed reading from the class speed band. Deterministic
/// given the seed.
inline std::vector<AnnotatedSample> gen_user_trace(
    const std::vector<DiscretePmf>& emissions,
    const std::vector<SpeedBand>& speed_models, const std::vector<Segment>& plan,
    std::uint64_t seed) {
  if (emissions.size() != speed_models.size() || emissions.empty()) {
    throw Error(ErrorKind::DimensionMismatch,
                "need one speed band per emission class");
  }
  UniformRng rng(seed);
  std::vector<AnnotatedSample> out;
  for (const Segment& segment : plan) {
    if (segment.label >= emissions.size()) {
      std::ostringstream msg;
      msg << "segment label " << segment.label << " out of range";
      throw Error(ErrorKind::DimensionMismatch, msg.str());
    }
    const SpeedBand& band = speed_models[segment.label];
    for (std::size_t t = 0; t < segment.count; ++t) {
      AnnotatedSample sample;
      sample.true_label = segment.label;
      sample.x = static_cast<std::uint32_t>(
          sample_index(rng, emissions[segment.label].masses()));
      sample.speed = band.lo + rng.next() * (band.hi - band.lo);
      out.push_back(sample);
    }
  }
  return out;
}

/// Adds observed (symbol, true label) counts to the pseudo-counts.
inline DirichletCategoricalModel update_ground_truth(
    const DirichletCategoricalModel& model,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& samples) {
  std::vector<std::vector<double>> conc = model.concentrations();
  for (const auto& [x, label] : samples) {
    if (label >= model.num_classes() || x >= model.alphabet_size()) {
      std::ostringstream msg;
      msg << "sample (x=" << x << ", y=" << label << ") out of range";
      throw Error(ErrorKind::DimensionMismatch, msg.str());
    }
    conc[label][x] += 1.0;
  }
  return DirichletCategoricalModel(std::move(conc), model.class_prior());
}

/// Noise-corrected update from weak labels: estimates the per-weak-class
/// conditionals, corrects them through the backward matrix, projects, and
/// converts class i's corrected pmf into pseudo-counts scaled by the
/// expected true-class count n~_i = sum_j n_j * backward(i, j). Total added
/// mass equals the sample count; at backward = I this reduces to plain
/// counting.
inline DirichletCategoricalModel update_weak_corrected(
    const DirichletCategoricalModel& model,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& samples,
    const ConfusionMatrix& backward, Projection projection,
    double smoothing = 0.5) {
  if (backward.num_classes() != model.num_classes()) {
    std::ostringstream msg;
    msg << "matrix has " << backward.num_classes() << " classes, model has "
        << model.num_classes();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  if (samples.empty()) return model;

  std::vector<WeakSample> weak_samples;
  weak_samples.reserve(samples.size());
  for (const auto& [x, weak] : samples) {
    weak_samples.push_back({x, weak});
  }
  const WeakDataset data(std::move(weak_samples), model.alphabet_size(),
                         model.num_classes());

  std::vector<double> weak_counts(model.num_classes(), 0.0);
  for (const WeakSample& s : data.samples()) weak_counts[s.weak_label] += 1.0;

  const std::vector<DiscretePmf> weak_pmfs = empirical_conditionals(data, smoothing);
  const std::vector<SignedMeasure> corrected = correct_densities(weak_pmfs, backward);

  std::vector<std::vector<double>> conc = model.concentrations();
  for (std::size_t i = 0; i < model.num_classes(); ++i) {
    double expected_count = 0.0;
    for (std::size_t j = 0; j < model.num_classes(); ++j) {
      expected_count += weak_counts[j] * backward(i, j);
    }
    if (expected_count <= 0.0) continue;
    const DiscretePmf pmf = project_to_pmf(corrected[i], projection);
    for (std::size_t a = 0; a < model.alphabet_size(); ++a) {
      conc[i][a] += expected_count * pmf[a];
    }
  }
  return DirichletCategoricalModel(std::move(conc), model.class_prior());
}

/// MAP readout: argmax_i prior_i * emission_i(x), ties to the lowest index.
inline std::uint32_t map_predict(const DirichletCategoricalModel& model,
                                 std::size_t symbol) {
  std::uint32_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < model.num_classes(); ++i) {
    const double score = model.class_prior()[i] * model.emission(i, symbol);
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::uint32_t>(i);
    }
  }
  return best;
}

/// Fraction of held-out samples the MAP readout mislabels.
inline double empirical_ber(
    const DirichletCategoricalModel& model,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& eval_samples) {
  if (eval_samples.empty()) {
    throw Error(ErrorKind::EmptyEvalSet, "evaluation set is empty");
  }
  std::size_t errors = 0;
  for (const auto& [x, label] : eval_samples) {
    if (map_predict(model, x) != label) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(eval_samples.size());
}

/// Configuration of the personalization demo. The baseline emulates a
/// population model mismatched to the simulated user: each class emission is
/// circularly shifted along the alphabet and interpolated toward uniform.
struct PersonalizationConfig {
  std::vector<std::uint64_t> seeds = {101, 102, 103, 104, 105, 106, 107,
                                      108, 109, 110, 111, 112, 113, 114,
                                      115, 116, 117, 118, 119, 120};
  std::size_t train_samples_per_class = 400;
  std::size_t eval_samples_per_class = 1000;
  double baseline_strength = 25.0;  // Dirichlet pseudo-counts per class
  int emission_shift = 2;           // circular symbol shift of the baseline
  double uniform_mix = 0.7;         // weight moved toward uniform
  Projection projection = Projection::ClipRenormalize;
  double smoothing = 0.5;
};

inline void validate(const PersonalizationConfig& cfg) {
  if (cfg.seeds.empty()) throw Error(ErrorKind::ParseError, "seeds must be nonempty");
  if (cfg.train_samples_per_class == 0) {
    throw Error(ErrorKind::ParseError, "train_samples_per_class must be >= 1");
  }
  if (cfg.eval_samples_per_class == 0) {
    throw Error(ErrorKind::ParseError, "eval_samples_per_class must be >= 1");
  }
  if (!(cfg.baseline_strength > 0.0)) {
    throw Error(ErrorKind::ParseError, "baseline_strength must be > 0");
  }
  if (!(cfg.uniform_mix >= 0.0 && cfg.uniform_mix <= 1.0)) {
    throw Error(ErrorKind::ParseError, "uniform_mix must lie in [0, 1]");
  }
  if (!(cfg.smoothing >= 0.0)) {
    throw Error(ErrorKind::ParseError, "smoothing must be >= 0");
  }
}

/// Population baseline prior to any personalization.
inline DirichletCategoricalModel baseline_model(const PersonalizationConfig& cfg) {
  const std::vector<DiscretePmf> user = default_user_emissions();
  const std::size_t support = user.front().support_size();
  const double uniform_mass = 1.0 / static_cast<double>(support);
  std::vector<std::vector<double>> conc(user.size(),
                                        std::vector<double>(support, 0.0));
  const int shift = ((cfg.emission_shift % static_cast<int>(support)) +
                     static_cast<int>(support)) %
                    static_cast<int>(support);
  for (std::size_t i = 0; i < user.size(); ++i) {
    for (std::size_t a = 0; a < support; ++a) {
      const std::size_t source =
          (a + support - static_cast<std::size_t>(shift)) % support;
      const double mixed = (1.0 - cfg.uniform_mix) * user[i][source] +
                           cfg.uniform_mix * uniform_mass;
      conc[i][a] = cfg.baseline_strength * mixed;
    }
  }
  return DirichletCategoricalModel(std::move(conc),
                                   DiscretePmf::uniform(user.size()));
}

struct PersonalizationOutcome {
  std::uint64_t seed = 0;
  double ber_baseline = 0.0;
  double ber_ground_truth = 0.0;
  double ber_weak_corrected = 0.0;
  Eigen::MatrixXd annotator_counts;  // raw per-true-class annotation counts
};

/// One personalization run: simulate the user's clean collection, annotate
/// it with the speed annotator (dropping gap readings), personalize the
/// baseline with ground-truth and with noise-corrected weak labels, and
/// score all three models on a held-out transition trace.
inline PersonalizationOutcome run_personalization(
    const PersonalizationConfig& cfg, std::uint64_t seed) {
  const std::vector<DiscretePmf> emissions = default_user_emissions();
  const std::vector<SpeedBand> speeds = default_speed_models();
  const std::size_t classes = emissions.size();

  std::vector<Segment> train_plan;
  std::vector<Segment> eval_plan;
  for (std::uint32_t c = 0; c < classes; ++c) {
    train_plan.push_back({c, cfg.train_samples_per_class});
    eval_plan.push_back({c, cfg.eval_samples_per_class});
  }
  const auto train = gen_user_trace(emissions, speeds, train_plan,
                                    derive_seed(seed, 1, 0.0, 0));
  const auto eval = gen_user_trace(emissions, speeds, eval_plan,
                                   derive_seed(seed, 2, 0.0, 0));

  std::vector<std::pair<std::uint32_t, std::uint32_t>> gt_pairs;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> weak_pairs;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(classes));
  for (const AnnotatedSample& s : train) {
    gt_pairs.emplace_back(s.x, s.true_label);
    const std::optional<std::uint32_t> weak = speed_annotator(s.speed);
    if (!weak.has_value()) continue;  // gap readings are dropped
    weak_pairs.emplace_back(s.x, *weak);
    counts(static_cast<Eigen::Index>(s.true_label),
           static_cast<Eigen::Index>(*weak)) += 1.0;
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> eval_pairs;
  eval_pairs.reserve(eval.size());
  for (const AnnotatedSample& s : eval) eval_pairs.emplace_back(s.x, s.true_label);

  const DirichletCategoricalModel baseline = baseline_model(cfg);
  const DirichletCategoricalModel personalized_gt =
      update_ground_truth(baseline, gt_pairs);
  const ConfusionMatrix backward = backward_from_forward(
      speed_annotator_confusion(), DiscretePmf::uniform(classes));
  const DirichletCategoricalModel personalized_weak = update_weak_corrected(
      baseline, weak_pairs, backward, cfg.projection, cfg.smoothing);

  PersonalizationOutcome outcome;
  outcome.seed = seed;
  outcome.ber_baseline = empirical_ber(baseline, eval_pairs);
  outcome.ber_ground_truth = empirical_ber(personalized_gt, eval_pairs);
  outcome.ber_weak_corrected = empirical_ber(personalized_weak, eval_pairs);
  outcome.annotator_counts = counts;
  return outcome;
}

struct PersonalizationReport {
  double ber_baseline = 0.0;        // medians over the configured seeds
  double ber_ground_truth = 0.0;
  double ber_weak_corrected = 0.0;
  Eigen::MatrixXd annotator_confusion_empirical;  // pooled, row-normalized
  std::vector<PersonalizationOutcome> per_seed;
};

inline double median(std::vector<double> values) {
  if (values.empty()) {
    throw Error(ErrorKind::EmptyEvalSet, "median of an empty set");
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

/// Runs the demo across all configured seeds and reports median BERs plus
/// the pooled empirical annotator confusion.
inline PersonalizationReport run_personalization_demo(
    const PersonalizationConfig& cfg) {
  validate(cfg);
  PersonalizationReport report;
  const std::size_t classes = kActivityClasses;
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(classes));
  std::vector<double> base, gt, weak;
  for (std::uint64_t seed : cfg.seeds) {
    PersonalizationOutcome outcome = run_personalization(cfg, seed);
    base.push_back(outcome.ber_baseline);
    gt.push_back(outcome.ber_ground_truth);
    weak.push_back(outcome.ber_weak_corrected);
    pooled += outcome.annotator_counts;
    report.per_seed.push_back(std::move(outcome));
  }
  report.ber_baseline = median(base);
  report.ber_ground_truth = median(gt);
  report.ber_weak_corrected = median(weak);
  for (Eigen::Index i = 0; i < pooled.rows(); ++i) {
    const double row_sum = pooled.row(i).sum();
    if (row_sum > 0.0) pooled.row(i) /= row_sum;
  }
  report.annotator_confusion_empirical = pooled;
  return report;
}

}  // namespace labelnoise
