// gssm-lab: radar tracking scenarios, estimator runs, Monte Carlo
// comparisons and window dimension reports.
//
// Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gssm_lab/experiment.hpp"
#include "gssm_lab/gssm.hpp"
#include "gssm_lab/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace gssm_lab;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct ScenarioFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<std::size_t> w;
  std::optional<std::string> truth_mode;
  std::optional<std::string> prior_mode;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Scenario JSON file");
    app->add_option("--seed", seed, "Random seed (first seed for Monte Carlo)");
    app->add_option("--steps", steps, "Number of measurement steps N")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--w", w, "Sliding window length")
        ->check(CLI::PositiveNumber);
    app->add_option("--truth-mode", truth_mode, "Truth initialization")
        ->check(CLI::IsMember({"sampled", "exact"}));
    app->add_option("--prior-mode", prior_mode, "Marginal prior mode")
        ->check(CLI::IsMember({"paper-diagonal", "exact-joint"}));
  }

  radar::ScenarioConfig resolve() const {
    radar::ScenarioConfig cfg =
        config.empty() ? radar::ScenarioConfig{} : load_scenario(config);
    if (seed) cfg.seed = *seed;
    if (steps) cfg.N = *steps;
    if (w) cfg.w = *w;
    if (truth_mode) cfg.truth_mode = radar::truth_mode_from_string(*truth_mode);
    if (prior_mode) cfg.prior_mode = prior_mode_from_string(*prior_mode);
    cfg.validate();
    return cfg;
  }
};

std::vector<EstimatorKind> kinds_of(const radar::ScenarioConfig& cfg) {
  std::vector<EstimatorKind> kinds;
  for (const auto& name : cfg.estimators) {
    kinds.push_back(estimator_from_string(name));
  }
  return kinds;
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void print_summary(const ComparisonSummary& s) {
  std::cout << "runs " << s.seeds.size() << ", trailing fraction "
            << s.trailing_fraction << "\n";
  for (const auto& e : s.estimators) {
    std::cout << "  " << e.estimator << " mean RMSE  x " << e.mean[0]
              << "  v " << e.mean[1] << "  h " << e.mean[2] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphical state space model lab: radar tracking with EKF, "
               "sliding-window FGO and GSSM estimators"};
  app.require_subcommand(1);

  ScenarioFlags sim_flags;
  std::string sim_out = "scenario.csv";
  auto* simulate = app.add_subcommand("simulate", "Write truth and ranges CSV");
  sim_flags.attach(simulate);
  simulate->add_option("--out", sim_out, "Output CSV path");

  ScenarioFlags run_flags;
  std::string estimator;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run one estimator, write its CSV");
  run_flags.attach(run);
  run->add_option("--estimator", estimator, "Estimator")
      ->required()
      ->check(CLI::IsMember({"ekf", "gssm", "fgo"}));
  run->add_option("--out", run_out, "Output CSV path (default <estimator>.csv)");

  ScenarioFlags cmp_flags;
  std::string cmp_dir = ".";
  double cmp_trailing = 1.0;
  auto* compare =
      app.add_subcommand("compare", "Run estimators on shared data");
  cmp_flags.attach(compare);
  compare->add_option("--out-dir", cmp_dir, "Directory for CSVs and summary");
  compare->add_option("--trailing", cmp_trailing,
                      "Trailing fraction of steps used for RMSE")
      ->check(CLI::Range(0.0, 1.0));

  ScenarioFlags mc_flags;
  std::string mc_dir = ".";
  double mc_trailing = 1.0;
  std::optional<int> mc_runs;
  unsigned mc_threads = 0;
  auto* monte =
      app.add_subcommand("monte-carlo", "Aggregate RMSE over seeds");
  mc_flags.attach(monte);
  monte->add_option("--runs", mc_runs, "Number of seeds")
      ->check(CLI::PositiveNumber);
  monte->add_option("--out-dir", mc_dir, "Directory for summary.json");
  monte->add_option("--trailing", mc_trailing,
                    "Trailing fraction of steps used for RMSE")
      ->check(CLI::Range(0.0, 1.0));
  monte->add_option("--threads", mc_threads,
                    "Worker threads (default: GSSM_LAB_THREADS or all cores)");

  long nb = 2, nc = 1, m = 1, dw = 10;
  auto* dims = app.add_subcommand("dims", "Print window dimension report");
  dims->add_option("--nb", nb, "Constant block size")
      ->check(CLI::NonNegativeNumber);
  dims->add_option("--nc", nc, "Time-varying block size")
      ->check(CLI::PositiveNumber);
  dims->add_option("--m", m, "Measurement size")->check(CLI::PositiveNumber);
  dims->add_option("--w", dw, "Window length")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*simulate) {
      const auto cfg = sim_flags.resolve();
      const ScenarioData data = generate_scenario(cfg, cfg.seed);
      std::ofstream out(sim_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + sim_out);
      write_scenario_csv(out, data.truth, data.ranges);
    } else if (*run) {
      const auto cfg = run_flags.resolve();
      const ScenarioData data = generate_scenario(cfg, cfg.seed);
      const EstimateSeries series =
          run_estimator(estimator_from_string(estimator), cfg, data);
      write_series_csv(run_out.empty() ? estimator + ".csv" : run_out, series);
    } else if (*compare) {
      if (!(cmp_trailing > 0.0)) throw CLI::ValidationError("--trailing > 0");
      const auto cfg = cmp_flags.resolve();
      const CompareResult res =
          run_compare(cfg, cfg.seed, kinds_of(cfg), cmp_trailing);
      ensure_dir(cmp_dir);
      for (const auto& series : res.series) {
        write_series_csv((fs::path(cmp_dir) / (series.estimator + ".csv")).string(),
                         series);
      }
      write_text(fs::path(cmp_dir) / "summary.json",
                 summary_to_json(res.summary));
      print_summary(res.summary);
    } else if (*monte) {
      if (!(mc_trailing > 0.0)) throw CLI::ValidationError("--trailing > 0");
      const auto cfg = mc_flags.resolve();
      const int runs = mc_runs.value_or(cfg.runs);
      const ComparisonSummary summary = run_monte_carlo(
          cfg, runs, kinds_of(cfg), mc_trailing, mc_threads);
      ensure_dir(mc_dir);
      write_text(fs::path(mc_dir) / "summary.json", summary_to_json(summary));
      print_summary(summary);
    } else if (*dims) {
      std::cout << dimension_report(nb, nc, m, dw).to_text();
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
