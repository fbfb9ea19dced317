#pragma once

// Test-only reference computations. Everything here is written from the
// closed-form expressions with explicit inverses and hand-placed blocks so it
// shares no code path with the library's factor assembly or solvers.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gssm_lab/ssm.hpp"

namespace gssm_lab::oracle {

/// (A^T P^-1 A)^-1 A^T P^-1 b with explicit inverses.
inline Vector pinv_solve(const Matrix& A, const Matrix& P, const Vector& b) {
  const Matrix Pinv = P.inverse();
  return (A.transpose() * Pinv * A).inverse() * A.transpose() * Pinv * b;
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// Information-form measurement update.
struct InfoUpdate {
  Vector mean;
  Matrix cov;
};

inline InfoUpdate information_update(const Vector& x, const Matrix& P,
                                     const Matrix& C, const Matrix& R,
                                     const Vector& y) {
  const Matrix Rinv = R.inverse();
  const Matrix cov = (P.inverse() + C.transpose() * Rinv * C).inverse();
  const Vector mean = x + cov * C.transpose() * Rinv * (y - C * x);
  return {mean, cov};
}

/// Dense batch MAP over x_0..x_N: rows [I 0 ..] for the prior, then per step
/// [-F I] and [0 C], solved with explicit inverses. Returns stacked states.
inline Vector batch_map(const DiscreteLinearSystem& sys, const Vector& x0,
                        const Matrix& P0, const std::vector<Vector>& inputs,
                        const std::vector<Vector>& ys) {
  const Index n = sys.F.rows();
  const Index m = sys.C.rows();
  const Index N = static_cast<Index>(ys.size());
  const Index rows = n + N * (n + m);
  const Index cols = n * (N + 1);
  Matrix A = Matrix::Zero(rows, cols);
  Matrix P = Matrix::Zero(rows, rows);
  Vector b = Vector::Zero(rows);
  A.block(0, 0, n, n).setIdentity();
  P.block(0, 0, n, n) = P0;
  b.head(n) = x0;
  Index r = n;
  for (Index k = 0; k < N; ++k) {
    A.block(r, k * n, n, n) = -sys.F;
    A.block(r, (k + 1) * n, n, n).setIdentity();
    P.block(r, r, n, n) = sys.Q;
    if (inputs[k].size() > 0) b.segment(r, n) = sys.B * inputs[k];
    r += n;
    A.block(r, (k + 1) * n, m, n) = sys.C;
    P.block(r, r, m, m) = sys.R;
    b.segment(r, m) = ys[k];
    r += m;
  }
  return pinv_solve(A, P, b);
}

/// Random discrete system with spectral radius < 1 and PD noises.
struct RandomLinear {
  DiscreteLinearSystem sys;
  Vector x0;
  Matrix P0;
  std::vector<Vector> inputs;
  std::vector<Vector> ys;
};

inline Matrix random_spd(std::mt19937_64& rng, Index n, double floor) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) M(i, j) = g(rng);
  return symmetrize(M * M.transpose() / static_cast<double>(n) +
                    floor * Matrix::Identity(n, n));
}

inline RandomLinear random_linear(std::uint64_t seed, Index n, Index m,
                                  Index l, int steps) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  RandomLinear out;
  Matrix F(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) F(i, j) = g(rng);
  const double radius =
      Eigen::EigenSolver<Matrix>(F).eigenvalues().cwiseAbs().maxCoeff();
  out.sys.F = F * (0.9 / std::max(radius, 1e-3));
  out.sys.B = Matrix(n, l);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < l; ++j) out.sys.B(i, j) = g(rng);
  out.sys.C = Matrix(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) out.sys.C(i, j) = g(rng);
  out.sys.Q = 0.1 * random_spd(rng, n, 0.1);
  out.sys.R = random_spd(rng, m, 0.5);
  out.sys.T = 1.0;
  out.x0 = Vector(n);
  for (Index i = 0; i < n; ++i) out.x0(i) = 3.0 * g(rng);
  out.P0 = random_spd(rng, n, 1.0);

  const Eigen::LLT<Matrix> lq(out.sys.Q), lr(out.sys.R), lp(out.P0);
  auto draw = [&](Index d) {
    Vector v(d);
    for (Index i = 0; i < d; ++i) v(i) = g(rng);
    return v;
  };
  Vector x = out.x0 + Matrix(lp.matrixL()) * draw(n);
  for (int k = 0; k < steps; ++k) {
    Vector u = draw(l);
    x = out.sys.F * x + out.sys.B * u + Matrix(lq.matrixL()) * draw(n);
    out.inputs.push_back(u);
    out.ys.push_back(out.sys.C * x + Matrix(lr.matrixL()) * draw(m));
  }
  return out;
}

}  // namespace gssm_lab::oracle
