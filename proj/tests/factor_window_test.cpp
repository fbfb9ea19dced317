#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gssm_lab/factor_window.hpp"
#include "gssm_lab/kalman.hpp"
#include "oracles.hpp"

using namespace gssm_lab;

namespace {

const VarId X0{1}, X1{2}, X2{3};

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vscalar(double v) { return Vector::Constant(1, v); }

// Unbounded window over a linear system fed with every measurement.
FactorWindow chain_window(const oracle::RandomLinear& rl, std::size_t steps,
                          std::size_t capacity = 0) {
  const Index n = rl.sys.F.rows();
  FactorWindow w(capacity);
  w.add_variable(VarId{1}, rl.x0);
  w.add_factor(Factor::prior(VarId{1}, rl.x0, rl.P0));
  for (std::size_t k = 0; k < steps; ++k) {
    const VarId from{static_cast<std::uint32_t>(k + 1)};
    const VarId to{static_cast<std::uint32_t>(k + 2)};
    w = slide(std::move(w),
              Factor::between(from, to, rl.sys.F, rl.sys.B * rl.inputs[k],
                              rl.sys.Q),
              Factor::linear(FactorKind::MeasurementLinear, {to}, {rl.sys.C},
                             rl.ys[k], rl.sys.R),
              PriorMode::ExactJoint);
  }
  (void)n;
  return w;
}

Matrix random_matrix(std::mt19937_64& rng, Index r, Index c) {
  std::normal_distribution<double> g;
  Matrix M(r, c);
  for (Index i = 0; i < M.size(); ++i) M(i) = g(rng);
  return M;
}

}  // namespace

TEST(Assemble, ScalarPriorTransitionMeasurement) {
  FactorWindow w;
  w.add_variable(X0, vscalar(0.0));
  w.add_variable(X1, vscalar(0.0));
  w.add_factor(Factor::prior(X0, vscalar(2.0), scalar(4.0)));
  w.add_factor(Factor::between(X0, X1, scalar(0.8), vscalar(0.5), scalar(0.1)));
  w.add_factor(Factor::linear(FactorKind::MeasurementLinear, {X1}, {scalar(3.0)},
                              vscalar(7.0), scalar(2.0)));
  const auto sys = assemble(w);
  const Matrix A{{1.0, 0.0}, {-0.8, 1.0}, {0.0, 3.0}};
  EXPECT_EQ(sys.A, A);
  EXPECT_EQ(sys.b, (Vector{{2.0, 0.5, 7.0}}));
  EXPECT_EQ(sys.P, (Matrix{{4.0, 0, 0}, {0, 0.1, 0}, {0, 0, 2.0}}));
}

TEST(Assemble, PriorOnlyIsIdentity) {
  FactorWindow w;
  const Matrix P{{2.0, 0.3}, {0.3, 1.0}};
  w.add_variable(X0, Vector::Zero(2));
  w.add_factor(Factor::prior(X0, Vector{{1.0, -1.0}}, P));
  const auto sys = assemble(w);
  EXPECT_EQ(sys.A, Matrix::Identity(2, 2));
  EXPECT_EQ(sys.P, P);
  EXPECT_EQ(sys.b, (Vector{{1.0, -1.0}}));
  const auto sol = solve_normal_equations(sys.A, sys.P, sys.b);
  EXPECT_LT(oracle::rel_err(sol.estimate, sys.b), 1e-15);
}

// Three transitions: block-bidiagonal transition rows, measurement rows on
// the newer state, compared entry by entry with a hand-placed dense matrix.
TEST(Assemble, ThreeStepChainMatchesDenseConstruction) {
  const auto rl = oracle::random_linear(4, 2, 1, 1, 3);
  const auto w = chain_window(rl, 3);
  const auto sys = assemble(w);
  const Index n = 2, m = 1;
  Matrix A = Matrix::Zero(n + 3 * (n + m), 4 * n);
  Vector b = Vector::Zero(A.rows());
  A.block(0, 0, n, n).setIdentity();
  b.head(n) = rl.x0;
  for (Index k = 0; k < 3; ++k) {
    const Index r = n + k * (n + m);
    A.block(r, k * n, n, n) = -rl.sys.F;
    A.block(r, (k + 1) * n, n, n).setIdentity();
    b.segment(r, n) = rl.sys.B * rl.inputs[k];
    A.block(r + n, (k + 1) * n, m, n) = rl.sys.C;
    b.segment(r + n, m) = rl.ys[k];
  }
  EXPECT_EQ(sys.A, A);
  EXPECT_EQ(sys.b, b);
  EXPECT_EQ(sys.P.block(0, 0, n, n), rl.P0);
  EXPECT_EQ(sys.P.block(n, n, n, n), rl.sys.Q);
  EXPECT_EQ(sys.P.block(n + n, n + n, m, m), rl.sys.R);
}

TEST(Assemble, UnanchoredChainIsRankDeficient) {
  FactorWindow w;
  w.add_variable(X0, vscalar(0.0));
  w.add_variable(X1, vscalar(0.0));
  w.add_factor(Factor::between(X0, X1, scalar(1.0), vscalar(0.0), scalar(1.0)));
  w.add_factor(Factor::linear(FactorKind::MeasurementLinear, {X1}, {scalar(1.0)},
                              vscalar(1.0), scalar(1.0)));
  EXPECT_THROW(assemble(w), RankDeficientError);
}

TEST(Assemble, RejectsFactorOnUnknownVariable) {
  FactorWindow w;
  w.add_variable(X0, vscalar(0.0));
  EXPECT_THROW(w.add_factor(Factor::between(X0, X1, scalar(1.0), vscalar(0.0),
                                            scalar(1.0))),
               DimensionError);
}

TEST(Factor, RejectsNonPositiveDefiniteNoise) {
  EXPECT_THROW(Factor::prior(X0, vscalar(0.0), scalar(0.0)), DimensionError);
  EXPECT_THROW(Factor::prior(X0, Vector::Zero(2), Matrix::Identity(3, 3)),
               DimensionError);
}

TEST(SolveNormalEquations, IdentityReturnsRhs) {
  const Vector b{{1.0, -2.0, 3.5}};
  const auto r = solve_normal_equations(Matrix::Identity(3, 3),
                                        Matrix::Identity(3, 3), b);
  EXPECT_LT((r.estimate - b).norm(), 1e-15);
  EXPECT_LT(r.objective, 1e-28);
}

TEST(SolveNormalEquations, TwoObservationsAverage) {
  const auto r = solve_normal_equations(Matrix::Ones(2, 1), Matrix::Identity(2, 2),
                                        Vector{{0.0, 2.0}});
  EXPECT_NEAR(r.estimate(0), 1.0, 1e-15);
  EXPECT_NEAR(r.objective, 2.0, 1e-14);
  EXPECT_NEAR(r.information(0, 0), 2.0, 1e-15);
}

TEST(SolveNormalEquations, MatchesExplicitInverseOnFuzzedSystems) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> cols_d(1, 20);
  for (int trial = 0; trial < 100; ++trial) {
    const Index cols = cols_d(rng);
    const Index rows = std::uniform_int_distribution<Index>(cols, 40)(rng);
    const Matrix A = random_matrix(rng, rows, cols);
    // Block-diagonal P from random SPD blocks of size 1..3.
    Matrix P = Matrix::Zero(rows, rows);
    for (Index r = 0; r < rows;) {
      const Index d = std::min<Index>(rows - r, 1 + trial % 3);
      P.block(r, r, d, d) = oracle::random_spd(rng, d, 0.5);
      r += d;
    }
    const Vector b = random_matrix(rng, rows, 1);
    const auto got = solve_normal_equations(A, P, b);
    EXPECT_LT(oracle::rel_err(got.estimate, oracle::pinv_solve(A, P, b)), 1e-10)
        << "trial " << trial << " (" << rows << "x" << cols << ")";
  }
}

TEST(SolveNormalEquations, DuplicateColumnReportsSmallestSingularValue) {
  std::mt19937_64 rng(8);
  Matrix A = random_matrix(rng, 6, 3);
  A.col(2) = A.col(0);
  try {
    solve_normal_equations(A, Matrix::Identity(6, 6), Vector::Ones(6));
    FAIL() << "expected RankDeficientError";
  } catch (const RankDeficientError& e) {
    EXPECT_LT(e.smallest_singular_value(), 1e-10);
  }
}

TEST(SolveNormalEquations, FewerRowsThanUnknowns) {
  EXPECT_THROW(solve_normal_equations(Matrix::Ones(1, 2), Matrix::Identity(1, 1),
                                      Vector::Ones(1)),
               RankDeficientError);
}

TEST(SolveNormalEquations, RejectsShapeMismatch) {
  EXPECT_THROW(solve_normal_equations(Matrix::Ones(3, 2), Matrix::Identity(2, 2),
                                      Vector::Ones(3)),
               DimensionError);
}

TEST(SolveNormalEquations, FullWindowMatchesBatchOracle) {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto rl = oracle::random_linear(seed, 3, 2, 1, 30);
    const auto w = chain_window(rl, 30);
    const auto sys = assemble(w);
    const auto got = solve_normal_equations(sys.A, sys.P, sys.b);
    const Vector ref = oracle::batch_map(rl.sys, rl.x0, rl.P0, rl.inputs, rl.ys);
    EXPECT_LT(oracle::rel_err(got.estimate, ref), 1e-10);
  }
}

namespace {

// Range-like nonlinear factor on a 2-D position.
Factor range_factor(VarId id, double y) {
  return Factor::relinearizable(
      {id}, {2},
      [](std::span<const Vector> v) { return vscalar(v[0].norm()); },
      [](std::span<const Vector> v) {
        return std::vector<Matrix>{Matrix(v[0].transpose() / v[0].norm())};
      },
      vscalar(y), scalar(0.01));
}

FactorWindow nonlinear_window() {
  FactorWindow w;
  w.add_variable(X0, Vector{{30.0, 40.0}});
  w.add_factor(Factor::prior(X0, Vector{{30.0, 40.0}}, 100.0 * Matrix::Identity(2, 2)));
  w.add_factor(range_factor(X0, 60.0));
  return w;
}

}  // namespace

TEST(GaussNewton, LinearWindowSolvesOnce) {
  const auto rl = oracle::random_linear(3, 2, 1, 1, 5);
  const auto w = chain_window(rl, 5);
  const auto r = gauss_newton(w);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.converged);
}

TEST(GaussNewton, InfiniteToleranceStopsAfterOneIteration) {
  const auto w = nonlinear_window();
  GaussNewtonOptions opt;
  opt.tol = INFINITY;
  const auto r = gauss_newton(w, opt);
  EXPECT_EQ(r.iterations, 1);
}

TEST(GaussNewton, ObjectiveIsMonotoneAndFitsRange) {
  const auto w = nonlinear_window();
  const auto r = gauss_newton(w);
  EXPECT_TRUE(r.converged);
  ASSERT_GE(r.objective_history.size(), 2u);
  for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
    EXPECT_LE(r.objective_history[i], r.objective_history[i - 1]);
  }
  EXPECT_NEAR(r.estimate.norm(), 60.0, 0.01);
  EXPECT_DOUBLE_EQ(r.objective, r.objective_history.back());
}

TEST(GaussNewton, IterationCapReportsUnconverged) {
  const auto w = nonlinear_window();
  GaussNewtonOptions opt;
  opt.tol = 0.0;
  opt.max_iter = 1;
  const auto r = gauss_newton(w, opt);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
}

TEST(Marginalize, BlockDiagonalKeepsBlockUnchanged) {
  const Matrix info{{4.0, 0.0}, {0.0, 2.0}};
  const std::vector<GaussianBelief::Block> blocks{{X0, 1}, {X1, 1}};
  const std::vector<VarId> keep{X1}, drop{X0};
  const auto g = marginalize(info, Vector{{1.0, 3.0}}, blocks, keep, drop);
  EXPECT_NEAR(g.covariance()(0, 0), 0.5, 1e-15);
  EXPECT_EQ(g.mean()(0), 3.0);
}

TEST(Marginalize, SchurComplementOfCorrelatedPair) {
  const Matrix info{{2.0, 1.0}, {1.0, 2.0}};
  const std::vector<GaussianBelief::Block> blocks{{X0, 1}, {X1, 1}};
  const std::vector<VarId> keep{X0}, drop{X1};
  const auto g = marginalize(info, Vector::Zero(2), blocks, keep, drop);
  EXPECT_NEAR(g.covariance()(0, 0), 1.0 / 1.5, 1e-15);
}

TEST(Marginalize, EqualsSubBlockOfFullInverse) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix info = oracle::random_spd(rng, 6, 0.3);
    const Vector mean = random_matrix(rng, 6, 1);
    const std::vector<GaussianBelief::Block> blocks{{X0, 2}, {X1, 3}, {X2, 1}};
    const std::vector<VarId> keep{X2, X0}, drop{X1};
    const auto g = marginalize(info, mean, blocks, keep, drop);
    const Matrix cov = info.inverse();
    Matrix expected(3, 3);
    const Index idx[3] = {5, 0, 1};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) expected(i, j) = cov(idx[i], idx[j]);
    EXPECT_LT(oracle::rel_err(g.covariance(), expected), 1e-10);
    EXPECT_EQ(g.mean()(0), mean(5));
    EXPECT_EQ(g.blocks().front().id, X2);
  }
}

TEST(Slide, BelowCapacityOnlyAppends) {
  const auto rl = oracle::random_linear(5, 2, 1, 1, 3);
  const auto w = chain_window(rl, 3, 5);
  EXPECT_EQ(w.step_count(), 3u);
  EXPECT_EQ(w.variables().size(), 4u);
  EXPECT_EQ(w.factors().size(), 7u);
  EXPECT_FALSE(w.at_capacity());
}

TEST(Slide, AtCapacityKeepsWindowLength) {
  const auto rl = oracle::random_linear(5, 2, 1, 1, 9);
  const auto w = chain_window(rl, 9, 4);
  EXPECT_EQ(w.step_count(), 4u);
  EXPECT_EQ(w.variables().size(), 5u);
  EXPECT_EQ(w.factors().front().kind(), FactorKind::Prior);
  EXPECT_EQ(w.factors().front().vars().front(), VarId{6});
}

TEST(Slide, RequiresExactlyOneNewState) {
  FactorWindow w(2);
  w.add_variable(X0, vscalar(0.0));
  w.add_factor(Factor::prior(X0, vscalar(0.0), scalar(1.0)));
  EXPECT_THROW(slide(w, Factor::between(X0, X0, scalar(1.0), vscalar(0.0),
                                        scalar(1.0)),
                     std::nullopt, PriorMode::ExactJoint),
               DimensionError);
}

TEST(SlidingWindowFgo, ExactJointUnitWindowEqualsKalmanFilter) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto rl = oracle::random_linear(seed, 3, 1, 1, 60);
    SlidingWindowOptions opt;
    opt.window = 1;
    opt.prior_mode = PriorMode::ExactJoint;
    const GaussianBelief init(rl.x0, rl.P0);
    const auto fgo = run_sliding_window(init, rl.sys, rl.inputs, rl.ys, opt);
    const auto kf = run_kalman(init, rl.sys, rl.inputs, rl.ys);
    ASSERT_EQ(fgo.size(), kf.size());
    for (std::size_t k = 0; k < kf.size(); ++k) {
      EXPECT_LT(oracle::rel_err(fgo[k].mean, kf[k].mean), 1e-8) << k;
      EXPECT_LT(oracle::rel_err(fgo[k].variance, kf[k].variance), 1e-8) << k;
    }
  }
}

// Separator with two blocks: a shared constant and the next state.
TEST(MarginalizeOldest, PaperDiagonalDropsCrossCovariance) {
  auto build = [] {
    FactorWindow w(1);
    const VarId c{0};
    w.add_variable(c, vscalar(0.0), VariableRole::Constant);
    w.add_variable(X0, vscalar(0.0));
    w.add_variable(X1, vscalar(0.0));
    w.add_factor(Factor::prior(c, vscalar(1.0), scalar(2.0)));
    w.add_factor(Factor::prior(X0, vscalar(0.5), scalar(1.0)));
    w.add_factor(Factor::linear(FactorKind::Between, {c, X0, X1},
                                {scalar(-0.5), scalar(-1.0), scalar(1.0)},
                                vscalar(0.0), scalar(0.2)));
    w.add_factor(Factor::linear(FactorKind::MeasurementLinear, {c, X1},
                                {scalar(1.0), scalar(1.0)}, vscalar(3.0),
                                scalar(0.5)));
    return w;
  };

  auto joint = build();
  marginalize_oldest(joint, PriorMode::ExactJoint);
  auto diag = build();
  marginalize_oldest(diag, PriorMode::PaperDiagonal);

  EXPECT_FALSE(joint.contains(X0));
  ASSERT_EQ(joint.factors().size(), 1u);
  ASSERT_EQ(joint.factors()[0].vars().size(), 2u);
  const Matrix Pj = joint.factors()[0].noise();
  EXPECT_NE(Pj(0, 1), 0.0);

  ASSERT_EQ(diag.factors().size(), 2u);
  for (const auto& f : diag.factors()) {
    ASSERT_EQ(f.kind(), FactorKind::Prior);
    ASSERT_EQ(f.vars().size(), 1u);
    const Index i = f.vars()[0] == VarId{0} ? 0 : 1;
    EXPECT_DOUBLE_EQ(f.noise()(0, 0), Pj(i, i));
  }
}
