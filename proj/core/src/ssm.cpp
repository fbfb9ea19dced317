#include "gssm_lab/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gssm_lab {

namespace {

void require_rows(const Matrix& M, Index rows, const char* what) {
  if (M.rows() != rows) {
    std::ostringstream os;
    os << what << ": expected " << rows << " rows, got " << M.rows();
    throw DimensionError(os.str());
  }
}

void require_cols(const Matrix& M, Index cols, const char* what) {
  if (M.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected " << cols << " columns, got " << M.cols();
    throw DimensionError(os.str());
  }
}

void require_square(const Matrix& M, Index n, const char* what) {
  require_rows(M, n, what);
  require_cols(M, n, what);
}

void require_psd(const Matrix& M, const char* what, bool strict) {
  require_symmetric(M, what);
  if (M.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (strict ? lo <= 0.0 : lo < -1e-12 * scale) {
    std::ostringstream os;
    os << what << " must be " << (strict ? "positive definite" : "PSD")
       << " (smallest eigenvalue " << lo << ")";
    throw DimensionError(os.str());
  }
}

void require_positive_interval(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    std::ostringstream os;
    os << "sample interval must be positive, got " << T;
    throw DimensionError(os.str());
  }
}

}  // namespace

std::string to_string(VarId id) { return "v" + std::to_string(id.value); }

Matrix symmetrize(const Matrix& P) { return 0.5 * (P + P.transpose()); }

void require_symmetric(const Matrix& M, const char* what, double tol) {
  if (M.rows() != M.cols()) {
    throw DimensionError(std::string(what) + " must be square");
  }
  if (M.size() == 0) return;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw DimensionError(std::string(what) + " must be symmetric");
  }
}

void ContinuousLinearSystem::validate() const {
  const Index n = A.rows();
  require_square(A, n, "A");
  require_rows(B, n, "B");
  require_cols(C, n, "C");
  require_square(Q, n, "Q");
  require_square(R, C.rows(), "R");
  require_psd(Q, "Q", false);
  require_psd(R, "R", true);
}

void DiscreteLinearSystem::validate() const {
  const Index n = F.rows();
  require_square(F, n, "F");
  require_rows(B, n, "B");
  require_cols(C, n, "C");
  require_square(Q, n, "Q");
  require_square(R, C.rows(), "R");
  require_psd(Q, "Q", false);
  require_psd(R, "R", true);
}

void PartitionedContinuousSystem::validate() const {
  const Index nc = A_c.rows();
  require_square(A_c, nc, "A_c");
  require_rows(A_b, nc, "A_b");
  require_rows(B, nc, "B");
  const Index m = R.rows();
  require_square(R, m, "R");
  require_rows(C_c, m, "C_c");
  require_cols(C_c, nc, "C_c");
  require_rows(C_b, m, "C_b");
  require_cols(C_b, A_b.cols(), "C_b");
  require_square(Q_c, nc, "Q_c");
  require_psd(Q_c, "Q_c", false);
  require_psd(R, "R", true);
}

Matrix PartitionedContinuousSystem::unified_A() const {
  Matrix A = Matrix::Zero(n(), n());
  A.topLeftCorner(n_c(), n_c()) = A_c;
  A.topRightCorner(n_c(), n_b()) = A_b;
  return A;
}

Matrix PartitionedContinuousSystem::unified_C() const {
  Matrix C(C_c.rows(), n());
  C << C_c, C_b;
  return C;
}

void PartitionedDiscreteSystem::validate() const {
  const Index nc = F_c.rows();
  require_square(F_c, nc, "F_c");
  require_rows(F_b, nc, "F_b");
  require_rows(B, nc, "B");
  const Index m = R.rows();
  require_square(R, m, "R");
  require_rows(C_c, m, "C_c");
  require_cols(C_c, nc, "C_c");
  require_rows(C_b, m, "C_b");
  require_cols(C_b, F_b.cols(), "C_b");
  require_square(Q, nc, "Q");
  require_psd(Q, "Q", false);
  require_psd(R, "R", true);
}

GaussianBelief::GaussianBelief(Vector mean, Matrix covariance)
    : GaussianBelief(mean, std::move(covariance),
                     {Block{VarId{0}, mean.size()}}) {}

GaussianBelief::GaussianBelief(Vector mean, Matrix covariance,
                               std::vector<Block> blocks)
    : mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      blocks_(std::move(blocks)) {
  if (covariance_.rows() != mean_.size() ||
      covariance_.cols() != mean_.size()) {
    throw DimensionError("belief covariance side must equal mean length");
  }
  Index total = 0;
  for (const auto& b : blocks_) total += b.dim;
  if (total != mean_.size()) {
    throw DimensionError("belief blocks do not cover the mean");
  }
  require_symmetric(covariance_, "belief covariance", 1e-6);
  covariance_ = symmetrize(covariance_);
}

Index GaussianBelief::offset_of(VarId id) const {
  Index offset = 0;
  for (const auto& b : blocks_) {
    if (b.id == id) return offset;
    offset += b.dim;
  }
  throw DimensionError("belief has no block " + to_string(id));
}

Index GaussianBelief::dim_of(VarId id) const {
  for (const auto& b : blocks_) {
    if (b.id == id) return b.dim;
  }
  throw DimensionError("belief has no block " + to_string(id));
}

bool GaussianBelief::contains(VarId id) const {
  return std::any_of(blocks_.begin(), blocks_.end(),
                     [id](const Block& b) { return b.id == id; });
}

Vector GaussianBelief::block_mean(VarId id) const {
  return mean_.segment(offset_of(id), dim_of(id));
}

Matrix GaussianBelief::block_covariance(VarId id) const {
  const Index o = offset_of(id);
  const Index d = dim_of(id);
  return covariance_.block(o, o, d, d);
}

Matrix numeric_jacobian(const std::function<Vector(const Vector&)>& f,
                        const Vector& x, double rel_step) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double step = rel_step * std::max(1.0, std::abs(x(i)));
    Vector xp = x;
    Vector xm = x;
    xp(i) += step;
    xm(i) -= step;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return J;
}

DiscreteLinearSystem discretize_linear(const ContinuousLinearSystem& sys,
                                       double T, const Matrix& Qd) {
  require_positive_interval(T);
  sys.validate();
  const Index n = sys.state_dim();
  require_square(Qd, n, "Qd");
  require_psd(Qd, "Qd", false);

  DiscreteLinearSystem out;
  out.F = Matrix::Identity(n, n) + sys.A * T;
  out.B = sys.B * T;
  out.C = sys.C;
  out.Q = symmetrize(Qd);
  out.R = symmetrize(sys.R);
  out.T = T;
  return out;
}

PartitionedDiscreteSystem discretize_partitioned(
    const PartitionedContinuousSystem& sys, double T, const Matrix& Qd) {
  require_positive_interval(T);
  sys.validate();
  const Index nc = sys.n_c();
  require_square(Qd, nc, "Qd");
  require_psd(Qd, "Qd", false);

  PartitionedDiscreteSystem out;
  out.F_c = Matrix::Identity(nc, nc) + sys.A_c * T;
  out.F_b = sys.A_b * T;
  out.B = sys.B * T;
  out.C_c = sys.C_c;
  out.C_b = sys.C_b;
  out.Q = symmetrize(Qd);
  out.R = symmetrize(sys.R);
  out.T = T;
  return out;
}

}  // namespace gssm_lab
