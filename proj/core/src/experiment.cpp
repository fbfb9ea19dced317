#include "gssm_lab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gssm_lab/gssm.hpp"
#include "gssm_lab/kalman.hpp"

namespace gssm_lab {

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Ekf: return "ekf";
    case EstimatorKind::Gssm: return "gssm";
    case EstimatorKind::Fgo: return "fgo";
  }
  return "unknown";
}

EstimatorKind estimator_from_string(const std::string& name) {
  if (name == "ekf") return EstimatorKind::Ekf;
  if (name == "gssm") return EstimatorKind::Gssm;
  if (name == "fgo") return EstimatorKind::Fgo;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

ScenarioData generate_scenario(const radar::ScenarioConfig& cfg,
                               std::uint64_t seed) {
  ScenarioData data;
  data.seed = seed;
  data.truth = radar::simulate_truth(cfg, seed);
  data.ranges = radar::measure_range(data.truth, cfg.R, seed);
  return data;
}

namespace {

EstimateRow make_row(const radar::ScenarioConfig& cfg,
                     const radar::RadarTruth& truth, std::size_t k,
                     const std::array<double, 3>& est,
                     const std::array<double, 3>& var) {
  EstimateRow row;
  row.step = static_cast<int>(k + 1);
  row.t = static_cast<double>(k + 1) * cfg.T;
  row.truth = {truth.x[k], truth.xdot[k], truth.h[k]};
  row.estimate = est;
  row.variance = var;
  for (std::size_t s = 0; s < 3; ++s) row.error[s] = est[s] - row.truth[s];
  return row;
}

void record(RunDiagnostics* diag, const SolveResult& solve) {
  if (!diag) return;
  diag->objective_histories.push_back(solve.objective_history);
  diag->iterations.push_back(solve.iterations);
  if (!solve.converged) ++diag->unconverged_steps;
}

}  // namespace

EstimateSeries run_estimator(EstimatorKind kind,
                             const radar::ScenarioConfig& cfg,
                             const ScenarioData& data,
                             RunDiagnostics* diagnostics) {
  EstimateSeries series;
  series.estimator = to_string(kind);
  const std::size_t n = data.ranges.size();
  series.rows.reserve(n);
  const Vector no_input = Vector::Zero(0);

  switch (kind) {
    case EstimatorKind::Ekf: {
      const radar::EkfSetup setup = radar::radar_ekf_config(cfg);
      KalmanState state{setup.prior, 0};
      for (std::size_t k = 0; k < n; ++k) {
        state = kf_predict(state, setup.system, no_input);
        state = ekf_update(state, setup.measurement,
                           Vector::Constant(1, data.ranges.range[k]));
        const Vector& m = state.belief.mean();
        const Vector v = state.belief.covariance().diagonal();
        series.rows.push_back(make_row(cfg, data.truth, k, {m(0), m(1), m(2)},
                                       {v(0), v(1), v(2)}));
      }
      break;
    }
    case EstimatorKind::Gssm: {
      const radar::GssmSetup setup = radar::radar_gssm_config(cfg);
      GssmWindow window(setup.system, setup.priors, setup.options,
                        setup.measurement);
      for (std::size_t k = 0; k < n; ++k) {
        window.append(no_input, Vector::Constant(1, data.ranges.range[k]));
        record(diagnostics, window.solve());
        const GssmEstimate e = window.estimate();
        // x_b is ordered (h, xdot).
        series.rows.push_back(make_row(
            cfg, data.truth, k, {e.x_c(0), e.x_b(1), e.x_b(0)},
            {e.x_c_variance(0), e.x_b_variance(1), e.x_b_variance(0)}));
      }
      break;
    }
    case EstimatorKind::Fgo: {
      const radar::FgoSetup setup = radar::radar_fgo_config(cfg);
      SlidingWindowFgo fgo(setup.prior, setup.system, setup.options,
                           setup.measurement);
      for (std::size_t k = 0; k < n; ++k) {
        const StepEstimate e =
            fgo.step(no_input, Vector::Constant(1, data.ranges.range[k]));
        record(diagnostics, fgo.last_solve());
        series.rows.push_back(
            make_row(cfg, data.truth, k, {e.mean(0), e.mean(1), e.mean(2)},
                     {e.variance(0), e.variance(1), e.variance(2)}));
      }
      break;
    }
  }
  return series;
}

CompareResult run_compare(const radar::ScenarioConfig& cfg, std::uint64_t seed,
                          const std::vector<EstimatorKind>& kinds,
                          double trailing_fraction) {
  CompareResult out;
  out.data = generate_scenario(cfg, seed);
  out.summary.trailing_fraction = trailing_fraction;
  out.summary.seeds = {seed};
  for (const EstimatorKind kind : kinds) {
    out.series.push_back(run_estimator(kind, cfg, out.data));
    EstimatorRmse rmse;
    rmse.estimator = to_string(kind);
    if (!out.series.back().empty()) {
      rmse.per_run.push_back(
          compute_rmse(out.series.back(), trailing_fraction).rmse);
    }
    finalize(rmse);
    out.summary.estimators.push_back(std::move(rmse));
  }
  return out;
}

unsigned thread_budget() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GSSM_LAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

ComparisonSummary run_monte_carlo(const radar::ScenarioConfig& cfg, int runs,
                                  const std::vector<EstimatorKind>& kinds,
                                  double trailing_fraction, unsigned threads) {
  if (runs < 1) throw std::invalid_argument("Monte Carlo needs at least 1 run");
  cfg.validate();
  if (threads == 0) threads = thread_budget();
  threads = std::min<unsigned>(threads, static_cast<unsigned>(runs));

  const auto n_runs = static_cast<std::size_t>(runs);
  // results[run][estimator]
  std::vector<std::vector<std::array<double, 3>>> results(n_runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_runs) return;
      try {
        const ScenarioData data = generate_scenario(cfg, cfg.seed + i);
        for (const EstimatorKind kind : kinds) {
          const EstimateSeries series = run_estimator(kind, cfg, data);
          results[i].push_back(
              series.empty() ? std::array<double, 3>{}
                             : compute_rmse(series, trailing_fraction).rmse);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_runs);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ComparisonSummary summary;
  summary.trailing_fraction = trailing_fraction;
  for (std::size_t i = 0; i < n_runs; ++i) summary.seeds.push_back(cfg.seed + i);
  for (std::size_t e = 0; e < kinds.size(); ++e) {
    EstimatorRmse rmse;
    rmse.estimator = to_string(kinds[e]);
    if (cfg.N > 0) {
      for (std::size_t i = 0; i < n_runs; ++i) {
        rmse.per_run.push_back(results[i][e]);
      }
    }
    finalize(rmse);
    summary.estimators.push_back(std::move(rmse));
  }
  return summary;
}

}  // namespace gssm_lab
