#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "labelnoise/confusion.hpp"
#include "labelnoise/density.hpp"
#include "labelnoise/error.hpp"
#include "labelnoise/experiment.hpp"
#include "labelnoise/personalize.hpp"
#include "labelnoise/pmf.hpp"

namespace labelnoise {

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

inline double parse_double(const std::string& text, std::size_t line_number) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << "line " << line_number << ": '" << text << "' is not a number";
    throw Error(ErrorKind::ParseError, msg.str());
  }
}

inline unsigned long parse_index(const std::string& text, std::size_t line_number) {
  try {
    std::size_t pos = 0;
    const unsigned long v = std::stoul(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    std::ostringstream msg;
    msg << "line " << line_number << ": '" << text << "' is not an index";
    throw Error(ErrorKind::ParseError, msg.str());
  }
}

inline std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return std::string(buffer);
}

}  // namespace detail

/// Loads a square matrix from header-less CSV: K lines of K decimals.
inline Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  if (lines.empty()) {
    throw Error(ErrorKind::ParseError, path.string() + " is empty");
  }
  const std::size_t k = detail::split_csv(lines[0]).size();
  if (lines.size() != k) {
    std::ostringstream msg;
    msg << path.string() << ": " << lines.size() << " rows but " << k
        << " columns; matrix must be square";
    throw Error(ErrorKind::ParseError, msg.str());
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < k; ++i) {
    const std::vector<std::string> fields = detail::split_csv(lines[i]);
    if (fields.size() != k) {
      std::ostringstream msg;
      msg << path.string() << " line " << i + 1 << ": expected " << k
          << " fields, got " << fields.size();
      throw Error(ErrorKind::ParseError, msg.str());
    }
    for (std::size_t j = 0; j < k; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          detail::parse_double(fields[j], i + 1);
    }
  }
  return m;
}

inline void save_matrix_csv(const Eigen::MatrixXd& m,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << detail::format_g17(m(i, j));
    }
    out << '\n';
  }
}

/// Pmf serialization: one "index,value" row per support point.
inline void save_pmf_csv(const DiscretePmf& pmf,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  for (std::size_t a = 0; a < pmf.support_size(); ++a) {
    out << a << ',' << detail::format_g17(pmf[a]) << '\n';
  }
}

inline DiscretePmf load_pmf_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  if (lines.empty()) {
    throw Error(ErrorKind::ParseError, path.string() + " is empty");
  }
  std::vector<double> masses(lines.size(), 0.0);
  std::vector<bool> seen(lines.size(), false);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::vector<std::string> fields = detail::split_csv(lines[li]);
    if (fields.size() != 2) {
      std::ostringstream msg;
      msg << path.string() << " line " << li + 1
          << ": expected 'index,value'";
      throw Error(ErrorKind::ParseError, msg.str());
    }
    const unsigned long index = detail::parse_index(fields[0], li + 1);
    if (index >= masses.size() || seen[index]) {
      std::ostringstream msg;
      msg << path.string() << " line " << li + 1 << ": index " << index
          << " duplicate or out of range";
      throw Error(ErrorKind::ParseError, msg.str());
    }
    seen[index] = true;
    masses[index] = detail::parse_double(fields[1], li + 1);
  }
  return DiscretePmf(std::move(masses));
}

/// Weak dataset rows: "x_index,weak_label".
inline WeakDataset load_weak_dataset_csv(const std::filesystem::path& path,
                                         std::size_t support_size,
                                         std::size_t num_classes) {
  const std::vector<std::string> lines = detail::read_lines(path);
  std::vector<WeakSample> samples;
  samples.reserve(lines.size());
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::vector<std::string> fields = detail::split_csv(lines[li]);
    if (fields.size() != 2) {
      std::ostringstream msg;
      msg << path.string() << " line " << li + 1
          << ": expected 'x_index,weak_label'";
      throw Error(ErrorKind::ParseError, msg.str());
    }
    WeakSample s;
    s.x = static_cast<std::uint32_t>(detail::parse_index(fields[0], li + 1));
    s.weak_label =
        static_cast<std::uint32_t>(detail::parse_index(fields[1], li + 1));
    samples.push_back(s);
  }
  return WeakDataset(std::move(samples), support_size, num_classes);
}

/// Conditional-density table rows: "class,x,value"; every (class, x) cell
/// must appear exactly once.
inline std::vector<DiscretePmf> load_density_table_csv(
    const std::filesystem::path& path) {
  const std::vector<std::string> lines = detail::read_lines(path);
  if (lines.empty()) {
    throw Error(ErrorKind::ParseError, path.string() + " is empty");
  }
  std::map<std::pair<unsigned long, unsigned long>, double> cells;
  unsigned long max_class = 0;
  unsigned long max_x = 0;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::vector<std::string> fields = detail::split_csv(lines[li]);
    if (fields.size() != 3) {
      std::ostringstream msg;
      msg << path.string() << " line " << li + 1 << ": expected 'class,x,value'";
      throw Error(ErrorKind::ParseError, msg.str());
    }
    const unsigned long cls = detail::parse_index(fields[0], li + 1);
    const unsigned long x = detail::parse_index(fields[1], li + 1);
    const double value = detail::parse_double(fields[2], li + 1);
    if (!cells.emplace(std::make_pair(cls, x), value).second) {
      std::ostringstream msg;
      msg << path.string() << " line " << li + 1 << ": duplicate cell ("
          << cls << "," << x << ")";
      throw Error(ErrorKind::ParseError, msg.str());
    }
    max_class = std::max(max_class, cls);
    max_x = std::max(max_x, x);
  }
  const std::size_t classes = max_class + 1;
  const std::size_t support = max_x + 1;
  if (cells.size() != classes * support) {
    std::ostringstream msg;
    msg << path.string() << ": expected " << classes * support
        << " cells for " << classes << " classes x " << support
        << " symbols, got " << cells.size();
    throw Error(ErrorKind::ParseError, msg.str());
  }
  std::vector<DiscretePmf> out;
  out.reserve(classes);
  for (unsigned long c = 0; c < classes; ++c) {
    std::vector<double> masses(support, 0.0);
    for (unsigned long x = 0; x < support; ++x) {
      masses[x] = cells.at({c, x});
    }
    out.emplace_back(std::move(masses));
  }
  return out;
}

inline void save_density_table_csv(const std::vector<DiscretePmf>& pmfs,
                                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  for (std::size_t c = 0; c < pmfs.size(); ++c) {
    for (std::size_t x = 0; x < pmfs[c].support_size(); ++x) {
      out << c << ',' << x << ',' << detail::format_g17(pmfs[c][x]) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// JSON configs. Parsing is strict: unknown keys are rejected by name.
// ---------------------------------------------------------------------------

inline nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j,
                                const std::vector<std::string>& known,
                                const char* what) {
  if (!j.is_object()) {
    throw Error(ErrorKind::ParseError,
                std::string(what) + " config must be a JSON object");
  }
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw Error(ErrorKind::ParseError,
                  std::string("unknown key \"") + item.key() + "\" in " + what +
                      " config");
    }
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError,
                std::string("key \"") + key + "\": " + e.what());
  }
}

inline Projection parse_projection(const nlohmann::json& j, const char* key,
                                   Projection fallback) {
  const std::string text =
      get_or<std::string>(j, key,
                          fallback == Projection::ClipRenormalize ? "clip"
                                                                  : "simplex");
  if (text == "clip") return Projection::ClipRenormalize;
  if (text == "simplex") return Projection::EuclideanSimplex;
  throw Error(ErrorKind::ParseError,
              "projection must be \"clip\" or \"simplex\", got \"" + text + "\"");
}

}  // namespace detail

inline const char* projection_name(Projection p) {
  return p == Projection::ClipRenormalize ? "clip" : "simplex";
}

/// Sweep config keys (all optional): binomial_trials, success_params,
/// class_prior, sample_sizes, noise_levels, runs_per_cell, base_seed,
/// smoothing, projection.
inline SyntheticConfig parse_synthetic_config(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"binomial_trials", "success_params", "class_prior", "sample_sizes",
       "noise_levels", "runs_per_cell", "base_seed", "smoothing", "projection"},
      "sweep");
  SyntheticConfig cfg;
  cfg.binomial_trials = detail::get_or<int>(j, "binomial_trials", cfg.binomial_trials);
  cfg.success_params =
      detail::get_or<std::vector<double>>(j, "success_params", cfg.success_params);
  cfg.class_prior =
      detail::get_or<std::vector<double>>(j, "class_prior", cfg.class_prior);
  cfg.sample_sizes =
      detail::get_or<std::vector<std::size_t>>(j, "sample_sizes", cfg.sample_sizes);
  cfg.noise_levels =
      detail::get_or<std::vector<double>>(j, "noise_levels", cfg.noise_levels);
  cfg.runs_per_cell =
      detail::get_or<std::size_t>(j, "runs_per_cell", cfg.runs_per_cell);
  cfg.base_seed = detail::get_or<std::uint64_t>(j, "base_seed", cfg.base_seed);
  cfg.smoothing = detail::get_or<double>(j, "smoothing", cfg.smoothing);
  cfg.projection = detail::parse_projection(j, "projection", cfg.projection);
  validate(cfg);
  return cfg;
}

inline nlohmann::json to_json(const SyntheticConfig& cfg) {
  return nlohmann::json{{"binomial_trials", cfg.binomial_trials},
                        {"success_params", cfg.success_params},
                        {"class_prior", cfg.class_prior},
                        {"sample_sizes", cfg.sample_sizes},
                        {"noise_levels", cfg.noise_levels},
                        {"runs_per_cell", cfg.runs_per_cell},
                        {"base_seed", cfg.base_seed},
                        {"smoothing", cfg.smoothing},
                        {"projection", projection_name(cfg.projection)}};
}

/// Personalize-demo config keys (all optional): seeds,
/// train_samples_per_class, eval_samples_per_class, baseline_strength,
/// emission_shift, uniform_mix, projection, smoothing.
inline PersonalizationConfig parse_personalization_config(const nlohmann::json& j) {
  detail::reject_unknown_keys(
      j,
      {"seeds", "train_samples_per_class", "eval_samples_per_class",
       "baseline_strength", "emission_shift", "uniform_mix", "projection",
       "smoothing"},
      "personalize-demo");
  PersonalizationConfig cfg;
  cfg.seeds = detail::get_or<std::vector<std::uint64_t>>(j, "seeds", cfg.seeds);
  cfg.train_samples_per_class = detail::get_or<std::size_t>(
      j, "train_samples_per_class", cfg.train_samples_per_class);
  cfg.eval_samples_per_class = detail::get_or<std::size_t>(
      j, "eval_samples_per_class", cfg.eval_samples_per_class);
  cfg.baseline_strength =
      detail::get_or<double>(j, "baseline_strength", cfg.baseline_strength);
  cfg.emission_shift = detail::get_or<int>(j, "emission_shift", cfg.emission_shift);
  cfg.uniform_mix = detail::get_or<double>(j, "uniform_mix", cfg.uniform_mix);
  cfg.projection = detail::parse_projection(j, "projection", cfg.projection);
  cfg.smoothing = detail::get_or<double>(j, "smoothing", cfg.smoothing);
  validate(cfg);
  return cfg;
}

inline nlohmann::json to_json(const PersonalizationConfig& cfg) {
  return nlohmann::json{
      {"seeds", cfg.seeds},
      {"train_samples_per_class", cfg.train_samples_per_class},
      {"eval_samples_per_class", cfg.eval_samples_per_class},
      {"baseline_strength", cfg.baseline_strength},
      {"emission_shift", cfg.emission_shift},
      {"uniform_mix", cfg.uniform_mix},
      {"projection", projection_name(cfg.projection)},
      {"smoothing", cfg.smoothing}};
}

inline nlohmann::json to_json(const PersonalizationReport& report) {
  nlohmann::json confusion = nlohmann::json::array();
  for (Eigen::Index i = 0; i < report.annotator_confusion_empirical.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < report.annotator_confusion_empirical.cols(); ++j) {
      row.push_back(report.annotator_confusion_empirical(i, j));
    }
    confusion.push_back(row);
  }
  nlohmann::json per_seed = nlohmann::json::array();
  for (const PersonalizationOutcome& outcome : report.per_seed) {
    per_seed.push_back({{"seed", outcome.seed},
                        {"ber_baseline", outcome.ber_baseline},
                        {"ber_ground_truth", outcome.ber_ground_truth},
                        {"ber_weak_corrected", outcome.ber_weak_corrected}});
  }
  return nlohmann::json{{"ber_baseline", report.ber_baseline},
                        {"ber_ground_truth", report.ber_ground_truth},
                        {"ber_weak_corrected", report.ber_weak_corrected},
                        {"annotator_confusion_empirical", confusion},
                        {"per_seed", per_seed}};
}

}  // namespace labelnoise
