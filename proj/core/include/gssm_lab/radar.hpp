#pragma once

// Range-only radar tracking: a target at horizontal distance x moving with
// near-constant velocity xdot at fixed altitude h, observed through the
// slant range sqrt(x^2 + h^2).

#include <cstdint>
#include <string>
#include <vector>

#include "gssm_lab/factor_window.hpp"
#include "gssm_lab/gssm.hpp"
#include "gssm_lab/ssm.hpp"

namespace gssm_lab::radar {

enum class TruthMode {
  Sampled,  ///< initial truth ~ N(prior mean, prior covariance)
  Exact,    ///< initial truth = prior mean
};

const char* to_string(TruthMode mode);
TruthMode truth_mode_from_string(const std::string& text);

struct Priors {
  double x = -100.0;
  double xdot = 200.0;
  double h = 2000.0;
  double P_x = 49.0;
  double P_xdot = 49.0;
  double P_h = 49.0;
};

/// Every setting of the tracking experiment. Units: m, s.
struct ScenarioConfig {
  double T = 0.05;
  int N = 1000;
  std::size_t w = 10;
  std::uint64_t seed = 1;
  int runs = 100;
  TruthMode truth_mode = TruthMode::Sampled;
  double Q_x = 0.005 * 0.005;     ///< per-step variance on x
  double Q_xdot = 0.005 * 0.005;  ///< per-step variance on xdot
  double R = 9.0;                 ///< range variance, m^2
  Priors priors;
  std::vector<std::string> estimators{"ekf", "gssm"};
  PriorMode prior_mode = PriorMode::PaperDiagonal;
  /// Lower bound on transition variances inside factor-graph estimators,
  /// whose factors need positive-definite noise (the unified FGO altitude
  /// transition, or any zero entry of Q).
  double variance_floor = 1e-10;

  void validate() const;
};

/// Step-0 state plus the states measured at steps 1..N.
struct RadarTruth {
  double x0 = 0.0;
  double xdot0 = 0.0;
  double h0 = 0.0;
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> xdot;
  std::vector<double> h;

  std::size_t size() const { return x.size(); }
};

struct RangeMeasurements {
  std::vector<double> range;
  std::uint64_t seed = 0;

  std::size_t size() const { return range.size(); }
};

struct RangeLinearization {
  double alpha = 0.0;  ///< x / rho
  double beta = 0.0;   ///< h / rho
};

double slant_range(double x, double h);

/// Throws NumericalError when x = h = 0.
RangeLinearization linearize_range(double x, double h);

RadarTruth simulate_truth(const ScenarioConfig& cfg, std::uint64_t seed);

/// rho_k = sqrt(x_k^2 + h_k^2) + r_k, r_k ~ N(0, R). R = 0 gives exact ranges.
RangeMeasurements measure_range(const RadarTruth& truth, double R,
                                std::uint64_t seed);

/// State [x, xdot, h].
struct EkfSetup {
  DiscreteLinearSystem system;
  NonlinearMeasurementModel measurement;
  GaussianBelief prior;
};

EkfSetup radar_ekf_config(const ScenarioConfig& cfg);

/// x_c = [x], x_b = [h, xdot].
struct GssmSetup {
  PartitionedDiscreteSystem system;
  PartitionedMeasurementModel measurement;
  GssmPriors priors;
  GssmOptions options;
};

GssmSetup radar_gssm_config(const ScenarioConfig& cfg);

/// Unified sliding-window FGO over [x, xdot, h].
struct FgoSetup {
  DiscreteLinearSystem system;
  NonlinearMeasurementModel measurement;
  GaussianBelief prior;
  SlidingWindowOptions options;
};

FgoSetup radar_fgo_config(const ScenarioConfig& cfg);

}  // namespace gssm_lab::radar
