// Command-line front end: confusion diagnostics, density and loss
// correction, the synthetic convergence sweep, and the personalization demo.
//
// Exit codes: 0 success, 1 domain error (Singular, NonStochastic, ...),
// 2 usage or I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "labelnoise/labelnoise.hpp"

namespace {

using labelnoise::Orientation;
using labelnoise::Projection;

labelnoise::Projection parse_projection_flag(const std::string& text) {
  if (text == "clip") return Projection::ClipRenormalize;
  if (text == "simplex") return Projection::EuclideanSimplex;
  throw labelnoise::Error(labelnoise::ErrorKind::ParseError,
                          "projection must be clip or simplex, got \"" + text +
                              "\"");
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw labelnoise::Error(labelnoise::ErrorKind::IoError,
                            "cannot open " + path.string() + " for writing");
  }
  out << j.dump(2) << "\n";
}

void run_diagnose(const std::string& matrix_path, const std::string& orientation) {
  Orientation o;
  if (orientation == "backward") {
    o = Orientation::Backward;
  } else if (orientation == "forward") {
    o = Orientation::Forward;
  } else {
    throw labelnoise::Error(labelnoise::ErrorKind::ParseError,
                            "orientation must be backward or forward, got \"" +
                                orientation + "\"");
  }
  const Eigen::MatrixXd raw = labelnoise::load_matrix_csv(matrix_path);
  const labelnoise::ConfusionMatrix cm = labelnoise::build_validated(raw, o);
  const labelnoise::ConfusionDiagnostics diag = labelnoise::diagnostics(cm);
  std::cout << "det=" << labelnoise::format_sig9(diag.determinant) << "\n"
            << "eigen_ratio=" << labelnoise::format_sig9(diag.eigen_ratio) << "\n"
            << "log_eigen_ratio=" << labelnoise::format_sig9(diag.log_eigen_ratio)
            << "\n"
            << "is_permutation=" << (diag.is_permutation ? "true" : "false")
            << "\n";
}

void run_correct(const std::string& matrix_path, const std::string& densities_path,
                 const std::string& projection, const std::string& out_path,
                 int verbosity) {
  const labelnoise::ConfusionMatrix backward = labelnoise::build_validated(
      labelnoise::load_matrix_csv(matrix_path), Orientation::Backward);
  const std::vector<labelnoise::DiscretePmf> weak =
      labelnoise::load_density_table_csv(densities_path);
  const std::vector<labelnoise::SignedMeasure> corrected =
      labelnoise::correct_densities(weak, backward);
  const Projection method = parse_projection_flag(projection);
  std::vector<labelnoise::DiscretePmf> projected;
  projected.reserve(corrected.size());
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    if (verbosity > 0) {
      std::cout << "class " << i << ": raw minimum "
                << labelnoise::format_sig9(corrected[i].min_value()) << "\n";
    }
    projected.push_back(labelnoise::project_to_pmf(corrected[i], method));
  }
  labelnoise::save_density_table_csv(projected, out_path);
}

void run_correct_loss(const std::string& matrix_path, const std::string& loss_path,
                      const std::string& out_path) {
  const labelnoise::ConfusionMatrix forward = labelnoise::build_validated(
      labelnoise::load_matrix_csv(matrix_path), Orientation::Forward);
  const nlohmann::json j = labelnoise::load_json(loss_path);
  std::vector<double> losses;
  if (j.is_array()) {
    losses = j.get<std::vector<double>>();
  } else if (j.is_object() && j.contains("loss")) {
    if (j.size() != 1) {
      throw labelnoise::Error(labelnoise::ErrorKind::ParseError,
                              "loss file object may only hold the key \"loss\"");
    }
    losses = j.at("loss").get<std::vector<double>>();
  } else {
    throw labelnoise::Error(
        labelnoise::ErrorKind::ParseError,
        "loss file must be a JSON array or an object with key \"loss\"");
  }
  const std::vector<double> corrected =
      labelnoise::correct_loss_multiclass(losses, forward);
  write_json_file(nlohmann::json{{"corrected_loss", corrected}}, out_path);
}

void run_sweep(const std::string& config_path, const std::string& out_path,
               unsigned workers, std::int64_t seed_override, int verbosity) {
  labelnoise::SyntheticConfig cfg =
      labelnoise::parse_synthetic_config(labelnoise::load_json(config_path));
  if (seed_override >= 0) {
    cfg.base_seed = static_cast<std::uint64_t>(seed_override);
  }
  if (verbosity > 0) {
    std::cout << labelnoise::to_json(cfg).dump(2) << "\n";
  }
  const std::vector<labelnoise::CellResult> cells =
      labelnoise::run_sweep(cfg, workers);
  labelnoise::write_results_csv(cells, out_path);
}

void run_personalize_demo(const std::string& config_path,
                          const std::string& out_path, std::int64_t seed_override,
                          int verbosity) {
  labelnoise::PersonalizationConfig cfg = labelnoise::parse_personalization_config(
      labelnoise::load_json(config_path));
  if (seed_override >= 0) {
    cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
  }
  if (verbosity > 0) {
    std::cout << labelnoise::to_json(cfg).dump(2) << "\n";
  }
  const labelnoise::PersonalizationReport report =
      labelnoise::run_personalization_demo(cfg);
  if (verbosity > 0) {
    std::cout << "ber_baseline=" << report.ber_baseline
              << " ber_ground_truth=" << report.ber_ground_truth
              << " ber_weak_corrected=" << report.ber_weak_corrected << "\n";
  }
  write_json_file(labelnoise::to_json(report), out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "labelnoise: noise-corrected learning from weakly annotated data.\n"
      "Confusion matrices load from header-less CSV (K rows of K decimals);\n"
      "orientation is declared, never inferred."};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Increase verbosity");

  std::string matrix_path;
  std::string orientation;
  std::string densities_path;
  std::string projection = "clip";
  std::string loss_path;
  std::string config_path;
  std::string out_path;
  unsigned workers = labelnoise::default_workers();
  std::int64_t seed_override = -1;

  CLI::App* diagnose = app.add_subcommand(
      "diagnose",
      "Validate a confusion matrix and print det, eigen_ratio (of inv*inv^T), "
      "log_eigen_ratio, and is_permutation");
  diagnose->add_option("--matrix", matrix_path, "Matrix CSV")->required();
  diagnose
      ->add_option("--orientation", orientation,
                   "backward (columns sum to 1) or forward (rows sum to 1)")
      ->required();

  CLI::App* correct = app.add_subcommand(
      "correct",
      "Noise-correct weak conditional densities through a BACKWARD matrix.\n"
      "--densities rows: class,x,value (one pmf per weak class); output has "
      "the same shape with projected corrected pmfs");
  correct->add_option("--matrix", matrix_path, "Backward matrix CSV")->required();
  correct->add_option("--densities", densities_path, "Weak conditionals CSV")
      ->required();
  correct->add_option("--projection", projection,
                      "clip (clip negatives, renormalize) or simplex "
                      "(Euclidean simplex projection); default clip");
  correct->add_option("--out", out_path, "Output CSV")->required();

  CLI::App* correct_loss = app.add_subcommand(
      "correct-loss",
      "Unbiased loss correction through a FORWARD matrix. --loss is a JSON "
      "array (or {\"loss\": [...]}) of per-class clean losses; output is "
      "{\"corrected_loss\": [...]}");
  correct_loss->add_option("--matrix", matrix_path, "Forward matrix CSV")
      ->required();
  correct_loss->add_option("--loss", loss_path, "Clean loss JSON")->required();
  correct_loss->add_option("--out", out_path, "Output JSON")->required();

  CLI::App* sweep = app.add_subcommand(
      "sweep",
      "Monte-Carlo convergence study; writes one CSV row per (n, d) cell.\n"
      "Config keys (JSON, all optional): binomial_trials (default 20), "
      "success_params (default [0.52,0.65,0.08], K=3), class_prior (default "
      "uniform), sample_sizes (default [1000,3000,10000,30000,100000]), "
      "noise_levels (default [0.95,0.9,0.8,0.7,0.6]), runs_per_cell (default "
      "2000), base_seed (default 12345), smoothing (default 0.5), projection "
      "(clip|simplex, default clip). Unknown keys are rejected.");
  sweep->add_option("--config", config_path, "Sweep config JSON")->required();
  sweep->add_option("--out", out_path, "Results CSV")->required();
  sweep->add_option("--workers", workers,
                    "Worker threads (default: available parallelism); results "
                    "are identical for any worker count");
  sweep->add_option("--seed", seed_override, "Override base_seed");

  CLI::App* demo = app.add_subcommand(
      "personalize-demo",
      "Personalization study with weak threshold-annotator labels; writes a "
      "JSON report {ber_baseline, ber_ground_truth, ber_weak_corrected, "
      "annotator_confusion_empirical, per_seed}.\n"
      "Config keys (JSON, all optional): seeds (default 101..120), "
      "train_samples_per_class (default 400), eval_samples_per_class (default "
      "1000), baseline_strength (default 25), emission_shift (default 2), "
      "uniform_mix (default 0.7), projection (clip|simplex, default clip), "
      "smoothing (default 0.5). Unknown keys are rejected.");
  demo->add_option("--config", config_path, "Demo config JSON")->required();
  demo->add_option("--out", out_path, "Report JSON")->required();
  demo->add_option("--seed", seed_override,
                   "Override the seed list with this single seed");

  // Let -v and other parent flags appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
    if (diagnose->parsed()) {
      run_diagnose(matrix_path, orientation);
    } else if (correct->parsed()) {
      run_correct(matrix_path, densities_path, projection, out_path, verbosity);
    } else if (correct_loss->parsed()) {
      run_correct_loss(matrix_path, loss_path, out_path);
    } else if (sweep->parsed()) {
      run_sweep(config_path, out_path, workers, seed_override, verbosity);
    } else if (demo->parsed()) {
      run_personalize_demo(config_path, out_path, seed_override, verbosity);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const labelnoise::Error& e) {
    std::cerr << e.what() << "\n";
    return labelnoise::is_usage_error(e.kind()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
