#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gssm_lab/experiment.hpp"
#include "gssm_lab/radar.hpp"

using namespace gssm_lab;
using namespace gssm_lab::radar;

namespace {

ScenarioConfig noise_free(int N) {
  ScenarioConfig cfg;
  cfg.N = N;
  cfg.Q_x = 0.0;
  cfg.Q_xdot = 0.0;
  cfg.truth_mode = TruthMode::Exact;
  return cfg;
}

RadarTruth fixed_truth(std::size_t n, double x, double h) {
  RadarTruth t;
  t.x.assign(n, x);
  t.xdot.assign(n, 0.0);
  t.h.assign(n, h);
  t.t.assign(n, 0.0);
  return t;
}

}  // namespace

TEST(SimulateTruth, NoiseFreeSingleStep) {
  const auto t = simulate_truth(noise_free(1), 1);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_DOUBLE_EQ(t.x[0], -90.0);
  EXPECT_DOUBLE_EQ(t.xdot[0], 200.0);
  EXPECT_DOUBLE_EQ(t.h[0], 2000.0);
  EXPECT_DOUBLE_EQ(t.t[0], 0.05);
}

TEST(SimulateTruth, NoiseFreeThousandSteps) {
  const auto t = simulate_truth(noise_free(1000), 1);
  ASSERT_EQ(t.size(), 1000u);
  EXPECT_NEAR(t.x.back(), 9900.0, 1e-8);
  EXPECT_DOUBLE_EQ(t.h.back(), 2000.0);
}

TEST(SimulateTruth, SeedDeterminesTrajectory) {
  ScenarioConfig cfg;
  cfg.N = 50;
  const auto a = simulate_truth(cfg, 7);
  const auto b = simulate_truth(cfg, 7);
  const auto c = simulate_truth(cfg, 8);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.xdot, b.xdot);
  EXPECT_EQ(a.h0, b.h0);
  EXPECT_NE(a.x, c.x);
}

TEST(SimulateTruth, ExactModeStartsAtPriorMean) {
  ScenarioConfig cfg;
  cfg.N = 3;
  cfg.truth_mode = TruthMode::Exact;
  const auto t = simulate_truth(cfg, 3);
  EXPECT_EQ(t.x0, -100.0);
  EXPECT_EQ(t.xdot0, 200.0);
  EXPECT_EQ(t.h0, 2000.0);
}

TEST(SimulateTruth, AltitudeIsConstant) {
  ScenarioConfig cfg;
  cfg.N = 200;
  const auto t = simulate_truth(cfg, 5);
  for (double h : t.h) EXPECT_EQ(h, t.h0);
}

TEST(MeasureRange, NoiseFreeRanges) {
  EXPECT_DOUBLE_EQ(measure_range(fixed_truth(1, 0.0, 2000.0), 0.0, 1).range[0], 2000.0);
  EXPECT_DOUBLE_EQ(measure_range(fixed_truth(1, 300.0, 400.0), 0.0, 1).range[0], 500.0);
}

TEST(MeasureRange, NoiseVarianceMatchesR) {
  const auto truth = fixed_truth(100000, 300.0, 400.0);
  const auto m = measure_range(truth, 9.0, 11);
  double mean = 0.0;
  for (double r : m.range) mean += r - 500.0;
  mean /= static_cast<double>(m.size());
  double var = 0.0;
  for (double r : m.range) var += (r - 500.0 - mean) * (r - 500.0 - mean);
  var /= static_cast<double>(m.size() - 1);
  EXPECT_NEAR(var, 9.0, 0.05 * 9.0);
  EXPECT_NEAR(mean, 0.0, 0.05);
}

TEST(MeasureRange, RejectsNegativeVariance) {
  EXPECT_THROW(measure_range(fixed_truth(1, 1.0, 1.0), -1.0, 1), DimensionError);
}

TEST(MeasureRange, StreamsAreIndependentOfTruthDraws) {
  // Same seed, different truth length: the shared prefix of noise matches.
  const auto a = measure_range(fixed_truth(10, 0.0, 100.0), 1.0, 4);
  const auto b = measure_range(fixed_truth(20, 0.0, 100.0), 1.0, 4);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(a.range[k], b.range[k]);
}

TEST(LinearizeRange, KnownPoints) {
  auto l = linearize_range(300.0, 400.0);
  EXPECT_DOUBLE_EQ(l.alpha, 0.6);
  EXPECT_DOUBLE_EQ(l.beta, 0.8);
  l = linearize_range(0.0, 2000.0);
  EXPECT_EQ(l.alpha, 0.0);
  EXPECT_EQ(l.beta, 1.0);
  l = linearize_range(-100.0, 2000.0);
  EXPECT_NEAR(l.alpha, -0.04994, 1e-5);
  EXPECT_NEAR(l.beta, 0.99875, 1e-5);
}

TEST(LinearizeRange, ZeroRangeIsError) {
  EXPECT_THROW(linearize_range(0.0, 0.0), NumericalError);
}

TEST(LinearizeRange, UnitNormOnRandomPoints) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng), h = u(rng);
    const auto l = linearize_range(x, h);
    EXPECT_NEAR(l.alpha * l.alpha + l.beta * l.beta, 1.0, 1e-12);
    EXPECT_NEAR(l.alpha * x + l.beta * h, slant_range(x, h),
                1e-12 * slant_range(x, h));
  }
}

TEST(RadarConfig, EkfMatrices) {
  const auto s = radar_ekf_config(ScenarioConfig{});
  const Matrix F{{1.0, 0.05, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  EXPECT_EQ(s.system.F, F);
  EXPECT_EQ(s.system.Q(0, 0), 2.5e-5);
  EXPECT_EQ(s.system.Q(1, 1), 2.5e-5);
  EXPECT_EQ(s.system.Q(2, 2), 0.0);
  EXPECT_EQ(s.measurement.R(0, 0), 9.0);
  EXPECT_EQ(s.prior.mean(), (Vector{{-100.0, 200.0, 2000.0}}));
  EXPECT_EQ(s.prior.covariance(), 49.0 * Matrix::Identity(3, 3));
}

TEST(RadarConfig, GssmPartition) {
  const auto s = radar_gssm_config(ScenarioConfig{});
  EXPECT_EQ(s.system.F_c, Matrix::Identity(1, 1));
  EXPECT_EQ(s.system.F_b, (Matrix{{0.0, 0.05}}));
  EXPECT_EQ(s.system.Q(0, 0), 2.5e-5);
  EXPECT_EQ(s.priors.constant.mean(), (Vector{{2000.0, 200.0}}));
  EXPECT_EQ(s.priors.oldest.mean()(0), -100.0);
  EXPECT_EQ(s.options.window, 10u);
  const auto [Jb, Jc] = s.measurement.jacobian(Vector{{400.0, 7.0}}, Vector{{300.0}});
  EXPECT_DOUBLE_EQ(Jb(0, 0), 0.8);
  EXPECT_EQ(Jb(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(Jc(0, 0), 0.6);
}

TEST(RadarConfig, RejectsInvalidSettings) {
  ScenarioConfig cfg;
  cfg.T = 0.0;
  EXPECT_THROW(radar_ekf_config(cfg), DimensionError);
  cfg = ScenarioConfig{};
  cfg.R = 0.0;
  EXPECT_THROW(simulate_truth(cfg, 1), DimensionError);
  cfg = ScenarioConfig{};
  cfg.w = 0;
  EXPECT_THROW(radar_gssm_config(cfg), DimensionError);
}

TEST(TruthMode, RoundTripsNames) {
  EXPECT_EQ(truth_mode_from_string(to_string(TruthMode::Sampled)), TruthMode::Sampled);
  EXPECT_EQ(truth_mode_from_string(to_string(TruthMode::Exact)), TruthMode::Exact);
  EXPECT_THROW(truth_mode_from_string("bogus"), DimensionError);
}

TEST(Experiment, EstimatorsShareTruthAndMeasurements) {
  ScenarioConfig cfg;
  cfg.N = 40;
  const auto res = run_compare(cfg, 3, {EstimatorKind::Ekf, EstimatorKind::Gssm,
                                        EstimatorKind::Fgo});
  ASSERT_EQ(res.series.size(), 3u);
  for (const auto& s : res.series) {
    ASSERT_EQ(s.size(), 40u);
    for (std::size_t k = 0; k < s.size(); ++k) {
      EXPECT_EQ(s.rows[k].truth, res.series[0].rows[k].truth);
      EXPECT_EQ(s.rows[k].t, res.series[0].rows[k].t);
      EXPECT_EQ(s.rows[k].step, static_cast<int>(k + 1));
      for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(s.rows[k].error[i], s.rows[k].estimate[i] - s.rows[k].truth[i]);
        EXPECT_GE(s.rows[k].variance[i], 0.0);
      }
    }
  }
}

TEST(Experiment, EstimatorsTrackNoiseFreeTarget) {
  ScenarioConfig cfg = noise_free(300);
  cfg.R = 1.0;
  const auto data = generate_scenario(cfg, 2);
  for (auto kind : {EstimatorKind::Ekf, EstimatorKind::Gssm, EstimatorKind::Fgo}) {
    const auto s = run_estimator(kind, cfg, data);
    const auto& last = s.rows.back();
    EXPECT_LT(std::abs(last.error[0]), 10.0) << to_string(kind);
  }
}

TEST(Experiment, EstimatorNames) {
  EXPECT_EQ(estimator_from_string("ekf"), EstimatorKind::Ekf);
  EXPECT_EQ(estimator_from_string("gssm"), EstimatorKind::Gssm);
  EXPECT_EQ(estimator_from_string("fgo"), EstimatorKind::Fgo);
  EXPECT_THROW(estimator_from_string("ukf"), std::invalid_argument);
}
