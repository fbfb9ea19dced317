#pragma once

// System-model types shared by every estimator, plus the two first-order
// discretizations (unified and partitioned).

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gssm_lab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Inconsistent shapes or invalid arguments supplied by the caller.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear-algebra step failed (singular system, indefinite covariance, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Identifier of one variable block inside a window or belief.
struct VarId {
  std::uint32_t value = 0;
  friend auto operator<=>(const VarId&, const VarId&) = default;
};

std::string to_string(VarId id);

/// (P + P^T) / 2.
Matrix symmetrize(const Matrix& P);

/// Throws DimensionError unless M is square and symmetric within `tol`
/// relative to its largest entry.
void require_symmetric(const Matrix& M, const char* what, double tol = 1e-9);

/// Continuous model x' = A x + B u + q, y = C x + r.
struct ContinuousLinearSystem {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix Q;
  Matrix R;

  Index state_dim() const { return A.rows(); }
  Index measurement_dim() const { return C.rows(); }
  Index input_dim() const { return B.cols(); }
  void validate() const;
};

/// x(k+1) = F x(k) + B u(k) + q(k),  y(k+1) = C x(k+1) + r(k+1).
struct DiscreteLinearSystem {
  Matrix F;
  Matrix B;
  Matrix C;
  Matrix Q;
  Matrix R;
  double T = 0.0;

  Index state_dim() const { return F.rows(); }
  Index measurement_dim() const { return C.rows(); }
  Index input_dim() const { return B.cols(); }
  void validate() const;
};

/// Continuous model split into a time-varying block x_c and a constant block
/// x_b. The constant block has no dynamics, so only the x_c rows of the
/// system matrix are stored.
struct PartitionedContinuousSystem {
  Matrix A_c;  ///< n_c x n_c
  Matrix A_b;  ///< n_c x n_b
  Matrix B;    ///< n_c x l
  Matrix C_c;  ///< m x n_c
  Matrix C_b;  ///< m x n_b
  Matrix Q_c;  ///< n_c x n_c
  Matrix R;    ///< m x m

  Index n_c() const { return A_c.rows(); }
  Index n_b() const { return A_b.cols(); }
  Index n() const { return n_c() + n_b(); }
  Index measurement_dim() const { return R.rows(); }
  void validate() const;

  /// The equivalent unified system matrix [[A_c, A_b], [0, 0]].
  Matrix unified_A() const;
  /// [C_c, C_b].
  Matrix unified_C() const;
};

struct PartitionedDiscreteSystem {
  Matrix F_c;  ///< n_c x n_c
  Matrix F_b;  ///< n_c x n_b
  Matrix B;    ///< n_c x l
  Matrix C_c;  ///< m x n_c
  Matrix C_b;  ///< m x n_b
  Matrix Q;    ///< n_c x n_c
  Matrix R;    ///< m x m
  double T = 0.0;

  Index n_c() const { return F_c.rows(); }
  Index n_b() const { return F_b.cols(); }
  Index measurement_dim() const { return R.rows(); }
  void validate() const;
};

/// Mean and covariance over an ordered list of variable blocks.
class GaussianBelief {
 public:
  struct Block {
    VarId id;
    Index dim = 0;
  };

  GaussianBelief() = default;
  /// Single anonymous block.
  GaussianBelief(Vector mean, Matrix covariance);
  GaussianBelief(Vector mean, Matrix covariance, std::vector<Block> blocks);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  Index dim() const { return mean_.size(); }

  /// Offset of block `id` within the stacked mean.
  Index offset_of(VarId id) const;
  Index dim_of(VarId id) const;
  bool contains(VarId id) const;

  Vector block_mean(VarId id) const;
  Matrix block_covariance(VarId id) const;

 private:
  Vector mean_;
  Matrix covariance_;
  std::vector<Block> blocks_;
};

/// y = h(x) + r with r ~ N(0, R).
struct NonlinearMeasurementModel {
  std::function<Vector(const Vector&)> h;
  std::function<Matrix(const Vector&)> jacobian;
  Matrix R;
};

/// Central finite-difference Jacobian of `f` with per-coordinate step
/// rel_step * max(1, |x_i|).
Matrix numeric_jacobian(const std::function<Vector(const Vector&)>& f,
                        const Vector& x, double rel_step = 1e-6);

/// F = I + A T, B_k = B T. Qd is the discrete process covariance.
DiscreteLinearSystem discretize_linear(const ContinuousLinearSystem& sys,
                                       double T, const Matrix& Qd);

/// F_c = I + A_c T, F_b = A_b T, B_k = B T. Qd is the discrete x_c covariance.
PartitionedDiscreteSystem discretize_partitioned(
    const PartitionedContinuousSystem& sys, double T, const Matrix& Qd);

}  // namespace gssm_lab
