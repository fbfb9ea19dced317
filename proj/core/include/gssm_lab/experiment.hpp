#pragma once

// Radar experiment driver shared by the CLI, acceptance suite and
// benchmarks: scenario generation, estimator runs, Monte Carlo aggregation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gssm_lab/estimate_series.hpp"
#include "gssm_lab/radar.hpp"

namespace gssm_lab {

enum class EstimatorKind { Ekf, Gssm, Fgo };

const char* to_string(EstimatorKind kind);
/// Throws std::invalid_argument for names other than ekf, gssm, fgo.
EstimatorKind estimator_from_string(const std::string& name);

struct ScenarioData {
  std::uint64_t seed = 0;
  radar::RadarTruth truth;
  radar::RangeMeasurements ranges;
};

/// Truth and measurements for one seed. Every estimator run on the result
/// sees the same streams.
ScenarioData generate_scenario(const radar::ScenarioConfig& cfg,
                               std::uint64_t seed);

/// Optional per-step solver traces from the window estimators.
struct RunDiagnostics {
  std::vector<std::vector<double>> objective_histories;
  std::vector<int> iterations;
  int unconverged_steps = 0;
};

EstimateSeries run_estimator(EstimatorKind kind,
                             const radar::ScenarioConfig& cfg,
                             const ScenarioData& data,
                             RunDiagnostics* diagnostics = nullptr);

struct CompareResult {
  ScenarioData data;
  std::vector<EstimateSeries> series;
  ComparisonSummary summary;
};

CompareResult run_compare(const radar::ScenarioConfig& cfg, std::uint64_t seed,
                          const std::vector<EstimatorKind>& kinds,
                          double trailing_fraction = 1.0);

/// Runs seeds cfg.seed .. cfg.seed + runs - 1 on up to `threads` workers
/// (0 = thread_budget()). Per-run results are reduced in seed order.
ComparisonSummary run_monte_carlo(const radar::ScenarioConfig& cfg, int runs,
                                  const std::vector<EstimatorKind>& kinds,
                                  double trailing_fraction = 1.0,
                                  unsigned threads = 0);

/// Hardware concurrency capped by GSSM_LAB_THREADS when set.
unsigned thread_budget();

}  // namespace gssm_lab
