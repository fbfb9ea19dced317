#pragma once

// Sliding-window weighted least squares over a list of Gaussian factors.
//
// A window stacks every factor row into A_w X_w = b_w with block-diagonal
// noise P_w and solves the weighted normal equations. Factors that are
// nonlinear in their variables are relinearized at the window's current
// linearization point, so repeated assemble/solve is Gauss-Newton. When the
// window is full, the oldest time-varying state is eliminated by a Schur
// complement and re-enters the window as a prior.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "gssm_lab/kalman.hpp"
#include "gssm_lab/ssm.hpp"

namespace gssm_lab {

/// A numerically or structurally rank-deficient least-squares system.
class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& what, double smallest_singular_value)
      : NumericalError(what), smallest_singular_value_(smallest_singular_value) {}
  double smallest_singular_value() const { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

enum class FactorKind {
  Prior,
  Between,
  MeasurementLinear,
  MeasurementRelinearizable,
};

const char* to_string(FactorKind kind);

/// One Gaussian factor: sum_i A_i x_i = rhs + noise, noise ~ N(0, Sigma).
/// Relinearizable factors model y = h(x_1..x_k) + noise instead and produce
/// their A_i and rhs from the Jacobian at a linearization point.
class Factor {
 public:
  using Predict = std::function<Vector(std::span<const Vector>)>;
  using Jacobians = std::function<std::vector<Matrix>(std::span<const Vector>)>;

  /// Linear rows evaluated at some point: blocks[i] multiplies variable i.
  struct Rows {
    std::vector<Matrix> blocks;
    Vector rhs;
  };

  static Factor prior(VarId id, Vector mean, Matrix covariance);
  /// Joint prior over every block of `belief`.
  static Factor prior(const GaussianBelief& belief);
  /// to = F from + rhs + noise, i.e. rows [-F, I].
  static Factor between(VarId from, VarId to, const Matrix& F, Vector rhs,
                        Matrix noise);
  static Factor linear(FactorKind kind, std::vector<VarId> vars,
                       std::vector<Matrix> blocks, Vector rhs, Matrix noise);
  /// y = h(x) + noise over `vars` with dimensions `dims`.
  static Factor relinearizable(std::vector<VarId> vars, std::vector<Index> dims,
                               Predict h, Jacobians jacobians, Vector y,
                               Matrix noise);

  FactorKind kind() const { return kind_; }
  const std::vector<VarId>& vars() const { return vars_; }
  const std::vector<Index>& dims() const { return dims_; }
  const Matrix& noise() const { return noise_; }
  Index rows() const { return noise_.rows(); }
  bool is_relinearizable() const {
    return kind_ == FactorKind::MeasurementRelinearizable;
  }
  bool touches(VarId id) const;

  /// Rows at `values` (one vector per referenced variable). For linear kinds
  /// the point is ignored. For relinearizable kinds
  /// rhs = y - h(x0) + sum_i J_i x0_i, so solving the stacked rows yields the
  /// Gauss-Newton iterate directly.
  Rows linearize(std::span<const Vector> values) const;

  /// rhs - sum_i A_i x_i for linear kinds, y - h(x) otherwise.
  Vector residual(std::span<const Vector> values) const;

  /// residual^T Sigma^-1 residual.
  double weighted_error(std::span<const Vector> values) const;

  /// Solves this factor's rows for the single variable `id` given the others.
  /// Used to seed a new state from its transition factor.
  Vector solve_for(VarId id, std::span<const Vector> values) const;

 private:
  Factor() = default;
  void finish();

  FactorKind kind_ = FactorKind::Prior;
  std::vector<VarId> vars_;
  std::vector<Index> dims_;
  std::vector<Matrix> blocks_;
  Vector rhs_;
  Matrix noise_;
  Eigen::LLT<Matrix> noise_llt_;
  Predict h_;
  Jacobians jacobians_;
};

enum class VariableRole { TimeVarying, Constant };

struct VariableBlock {
  VarId id;
  Index dim = 0;
  VariableRole role = VariableRole::TimeVarying;
};

class FactorWindow {
 public:
  /// capacity: maximum number of transitions between retained time-varying
  /// states (the window length w). 0 means unbounded.
  explicit FactorWindow(std::size_t capacity = 0) : capacity_(capacity) {}

  void add_variable(VarId id, const Vector& initial,
                    VariableRole role = VariableRole::TimeVarying);
  /// Drops a variable that no factor references any more.
  void remove_variable(VarId id);

  void add_factor(Factor factor);
  void prepend_factor(Factor factor);
  /// Removes and returns every factor matching `pred`, preserving order.
  std::vector<Factor> extract_factors(
      const std::function<bool(const Factor&)>& pred);

  const std::vector<VariableBlock>& variables() const { return variables_; }
  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t capacity() const { return capacity_; }

  bool contains(VarId id) const;
  const VariableBlock& variable(VarId id) const;
  Index offset_of(VarId id) const;
  Index dim() const { return point_.size(); }
  Index row_count() const;

  const Vector& linearization_point() const { return point_; }
  void set_linearization_point(const Vector& point);
  Vector value_of(VarId id) const { return value_of(id, point_); }
  Vector value_of(VarId id, const Vector& stacked) const;

  /// Time-varying variables in insertion order.
  std::vector<VarId> time_varying() const;
  /// Number of transitions spanned by the retained time-varying states.
  std::size_t step_count() const;
  bool at_capacity() const;

  bool has_relinearizable() const;

  /// Weighted SSE of all factor residuals at stacked state X.
  double objective(const Vector& X) const;

  /// Values of `factor`'s variables taken from stacked state X.
  std::vector<Vector> gather(const Factor& factor, const Vector& X) const;

 private:
  std::size_t capacity_;
  std::vector<VariableBlock> variables_;
  std::vector<Factor> factors_;
  Vector point_;
};

/// A_w X = b_w with P_w block-diagonal.
struct LinearSystem {
  Matrix A;
  Matrix P;
  Vector b;
};

struct SolveResult {
  Vector estimate;
  Matrix information;  ///< A^T P^-1 A at the estimate
  double objective = 0.0;
  int iterations = 0;
  bool converged = true;
  /// Objective at the starting point followed by each accepted iterate.
  std::vector<double> objective_history;
};

/// Stacks the window's factors (linearized at its current point) in factor
/// order. Throws RankDeficientError when a connected group of variables has
/// no prior anchoring it.
LinearSystem assemble(const FactorWindow& window);
LinearSystem assemble(const FactorWindow& window, const Vector& at);

/// Minimizes ||A X - b||^2 weighted by P^-1 via whitening and a
/// column-pivoted QR. Throws RankDeficientError with the smallest singular
/// value when A^T P^-1 A is numerically singular.
SolveResult solve_normal_equations(const Matrix& A, const Matrix& P,
                                   const Vector& b);

struct GaussNewtonOptions {
  double tol = 1e-6;
  int max_iter = 20;
  int max_halvings = 8;
};

/// Relinearize, solve, step; repeated until the accepted step has norm < tol
/// or max_iter is reached (then converged == false). Steps are halved until
/// the objective does not increase. A window with only linear factors is
/// solved once.
SolveResult gauss_newton(const FactorWindow& window,
                         const GaussNewtonOptions& options = {});

/// Eliminates the `drop` blocks from a joint Gaussian in information form.
/// `blocks` describes the layout of `info` and `mean`.
GaussianBelief marginalize(const Matrix& info, const Vector& mean,
                           std::span<const GaussianBelief::Block> blocks,
                           std::span<const VarId> keep,
                           std::span<const VarId> drop);

enum class PriorMode {
  /// Marginal prior split into independent per-block priors.
  PaperDiagonal,
  /// Dense joint prior over all separator blocks.
  ExactJoint,
};

const char* to_string(PriorMode mode);

/// Marginal over the neighbours of the oldest time-varying state, computed
/// from every factor confined to that state and its neighbours, linearized
/// at the window's current point. The absorbed factors and the state are
/// removed from the window and the marginal is re-entered as prior factors
/// ahead of the remaining ones.
void marginalize_oldest(FactorWindow& window, PriorMode mode);

/// Advances the window by one step. At capacity the oldest time-varying
/// state is marginalized first. The new state is the variable of `between`
/// not yet in the window; it is seeded by solving `between` for it.
FactorWindow slide(FactorWindow window, const Factor& between,
                   const std::optional<Factor>& measurement, PriorMode mode);

struct SlidingWindowOptions {
  std::size_t window = 10;
  PriorMode prior_mode = PriorMode::PaperDiagonal;
  GaussNewtonOptions gauss_newton;
  /// When false every step is a single linearized solve.
  bool iterate = true;
};

/// Standard sliding-window factor-graph estimator over a discrete system
/// with one state block per time step.
class SlidingWindowFgo {
 public:
  SlidingWindowFgo(const GaussianBelief& initial, DiscreteLinearSystem sys,
                   SlidingWindowOptions options = {},
                   std::optional<NonlinearMeasurementModel> measurement = {});

  StepEstimate step(const Vector& u, const Vector& y);

  const FactorWindow& window() const { return window_; }
  const SolveResult& last_solve() const { return last_; }
  static VarId state_id(int step) {
    return VarId{static_cast<std::uint32_t>(step + 1)};
  }

 private:
  DiscreteLinearSystem sys_;
  SlidingWindowOptions options_;
  std::optional<NonlinearMeasurementModel> model_;
  FactorWindow window_;
  SolveResult last_;
  int step_ = 0;
};

/// Runs SlidingWindowFgo over the streams.
StateTrack run_sliding_window(
    const GaussianBelief& initial, const DiscreteLinearSystem& sys,
    std::span<const Vector> inputs, std::span<const Vector> measurements,
    const SlidingWindowOptions& options = {},
    const std::optional<NonlinearMeasurementModel>& measurement = {});

}  // namespace gssm_lab
