#include "gssm_lab/radar.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace gssm_lab::radar {

namespace {

// Truth and measurement noise come from independent streams of one seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint32_t which) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), which};
  return std::mt19937_64(seq);
}

constexpr std::uint32_t kTruthStream = 0x7275;
constexpr std::uint32_t kRangeStream = 0x6d65;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DimensionError(std::string(name) + " must be positive");
  }
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DimensionError(std::string(name) + " must be non-negative");
  }
}

}  // namespace

const char* to_string(TruthMode mode) {
  return mode == TruthMode::Sampled ? "sampled" : "exact";
}

TruthMode truth_mode_from_string(const std::string& text) {
  if (text == "sampled") return TruthMode::Sampled;
  if (text == "exact") return TruthMode::Exact;
  throw DimensionError("unknown truth mode '" + text + "'");
}

void ScenarioConfig::validate() const {
  require_positive(T, "T");
  if (N < 0) throw DimensionError("N must be non-negative");
  if (w < 1) throw DimensionError("w must be at least 1");
  if (runs < 1) throw DimensionError("runs must be at least 1");
  require_non_negative(Q_x, "Q.x");
  require_non_negative(Q_xdot, "Q.xdot");
  require_positive(R, "R");
  require_positive(priors.P_x, "priors.P_x");
  require_positive(priors.P_xdot, "priors.P_xdot");
  require_positive(priors.P_h, "priors.P_h");
  require_positive(variance_floor, "variance_floor");
}

double slant_range(double x, double h) { return std::hypot(x, h); }

RangeLinearization linearize_range(double x, double h) {
  const double rho = slant_range(x, h);
  if (!(rho > 0.0)) {
    throw NumericalError("range Jacobian is undefined at zero range");
  }
  return RangeLinearization{x / rho, h / rho};
}

RadarTruth simulate_truth(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto rng = stream(seed, kTruthStream);
  std::normal_distribution<double> normal(0.0, 1.0);

  RadarTruth truth;
  truth.x0 = cfg.priors.x;
  truth.xdot0 = cfg.priors.xdot;
  truth.h0 = cfg.priors.h;
  if (cfg.truth_mode == TruthMode::Sampled) {
    truth.x0 += std::sqrt(cfg.priors.P_x) * normal(rng);
    truth.xdot0 += std::sqrt(cfg.priors.P_xdot) * normal(rng);
    truth.h0 += std::sqrt(cfg.priors.P_h) * normal(rng);
  }

  const auto n = static_cast<std::size_t>(cfg.N);
  truth.t.reserve(n);
  truth.x.reserve(n);
  truth.xdot.reserve(n);
  truth.h.reserve(n);
  const double sx = std::sqrt(cfg.Q_x);
  const double sv = std::sqrt(cfg.Q_xdot);
  double x = truth.x0;
  double v = truth.xdot0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double qx = normal(rng);
    const double qv = normal(rng);
    x = x + cfg.T * v + sx * qx;
    v = v + sv * qv;
    truth.t.push_back(static_cast<double>(k) * cfg.T);
    truth.x.push_back(x);
    truth.xdot.push_back(v);
    truth.h.push_back(truth.h0);
  }
  return truth;
}

RangeMeasurements measure_range(const RadarTruth& truth, double R,
                                std::uint64_t seed) {
  require_non_negative(R, "R");
  auto rng = stream(seed, kRangeStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sigma = std::sqrt(R);
  RangeMeasurements out;
  out.seed = seed;
  out.range.reserve(truth.size());
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double noise = normal(rng);
    out.range.push_back(slant_range(truth.x[k], truth.h[k]) + sigma * noise);
  }
  return out;
}

namespace {

NonlinearMeasurementModel range_model(double R) {
  NonlinearMeasurementModel model;
  model.h = [](const Vector& s) {
    Vector y(1);
    y(0) = slant_range(s(0), s(2));
    return y;
  };
  model.jacobian = [](const Vector& s) {
    const RangeLinearization lin = linearize_range(s(0), s(2));
    Matrix J(1, 3);
    J << lin.alpha, 0.0, lin.beta;
    return J;
  };
  model.R = Matrix::Constant(1, 1, R);
  return model;
}

Matrix transition(double T) {
  Matrix F(3, 3);
  F << 1.0, T, 0.0,
       0.0, 1.0, 0.0,
       0.0, 0.0, 1.0;
  return F;
}

GaussianBelief full_prior(const Priors& p) {
  return GaussianBelief(Vector{{p.x, p.xdot, p.h}},
                        Vector{{p.P_x, p.P_xdot, p.P_h}}.asDiagonal());
}

}  // namespace

EkfSetup radar_ekf_config(const ScenarioConfig& cfg) {
  cfg.validate();
  ContinuousLinearSystem cont;
  cont.A = Matrix::Zero(3, 3);
  cont.A(0, 1) = 1.0;
  cont.B = Matrix::Zero(3, 0);
  cont.C = Matrix::Zero(1, 3);
  cont.Q = Matrix::Zero(3, 3);
  cont.R = Matrix::Constant(1, 1, cfg.R);
  const Matrix Qd = Vector{{cfg.Q_x, cfg.Q_xdot, 0.0}}.asDiagonal();

  EkfSetup setup{discretize_linear(cont, cfg.T, Qd), range_model(cfg.R),
                 full_prior(cfg.priors)};
  return setup;
}

GssmSetup radar_gssm_config(const ScenarioConfig& cfg) {
  cfg.validate();
  // x_c = [x], x_b = [h, xdot]; dx/dt = xdot.
  PartitionedContinuousSystem cont;
  cont.A_c = Matrix::Zero(1, 1);
  cont.A_b = Matrix{{0.0, 1.0}};
  cont.B = Matrix::Zero(1, 0);
  cont.C_c = Matrix::Zero(1, 1);
  cont.C_b = Matrix::Zero(1, 2);
  cont.Q_c = Matrix::Zero(1, 1);
  cont.R = Matrix::Constant(1, 1, cfg.R);

  GssmSetup setup;
  setup.system = discretize_partitioned(
      cont, cfg.T,
      Matrix::Constant(1, 1, std::max(cfg.Q_x, cfg.variance_floor)));

  setup.measurement.R = cont.R;
  setup.measurement.h = [](const Vector& xb, const Vector& xc) {
    Vector y(1);
    y(0) = slant_range(xc(0), xb(0));
    return y;
  };
  setup.measurement.jacobian = [](const Vector& xb, const Vector& xc) {
    const RangeLinearization lin = linearize_range(xc(0), xb(0));
    return std::pair<Matrix, Matrix>{Matrix{{lin.beta, 0.0}},
                                     Matrix{{lin.alpha}}};
  };

  const Priors& p = cfg.priors;
  setup.priors.constant =
      GaussianBelief(Vector{{p.h, p.xdot}},
                     Vector{{p.P_h, p.P_xdot}}.asDiagonal(),
                     {{GssmWindow::constant_id(), 2}});
  setup.priors.oldest =
      GaussianBelief(Vector{{p.x}}, Matrix::Constant(1, 1, p.P_x),
                     {{GssmWindow::state_id(0), 1}});
  setup.options.window = cfg.w;
  setup.options.prior_mode = cfg.prior_mode;
  return setup;
}

FgoSetup radar_fgo_config(const ScenarioConfig& cfg) {
  cfg.validate();
  FgoSetup setup;
  setup.system.F = transition(cfg.T);
  setup.system.B = Matrix::Zero(3, 0);
  setup.system.C = Matrix::Zero(1, 3);
  setup.system.Q =
      Vector{{std::max(cfg.Q_x, cfg.variance_floor),
              std::max(cfg.Q_xdot, cfg.variance_floor), cfg.variance_floor}}
          .asDiagonal();
  setup.system.R = Matrix::Constant(1, 1, cfg.R);
  setup.system.T = cfg.T;
  setup.measurement = range_model(cfg.R);
  setup.prior = full_prior(cfg.priors);
  setup.options.window = cfg.w;
  setup.options.prior_mode = cfg.prior_mode;
  return setup;
}

}  // namespace gssm_lab::radar
