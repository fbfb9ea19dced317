#pragma once

// Graphical state space model: a sliding window over the time-varying block
// x_c(k..k+w) plus a single constant block x_b that every step shares.
//
// Column layout X_w = [x_b, x_c(k), ..., x_c(k+w)]. Row layout: prior(x_b),
// prior(x_c(k)), then per step a transition row
//   [-F_b, ..., -F_c, I] X = B u
// and a measurement row
//   [C_b, ..., C_c] X = y.
// x_b is never marginalized; only the oldest x_c leaves the window.

#include <optional>
#include <span>
#include <string>
#include <utility>

#include "gssm_lab/factor_window.hpp"
#include "gssm_lab/ssm.hpp"

namespace gssm_lab {

/// y = h(x_b, x_c) + r. The Jacobians are returned as (d/dx_b, d/dx_c).
struct PartitionedMeasurementModel {
  std::function<Vector(const Vector& x_b, const Vector& x_c)> h;
  std::function<std::pair<Matrix, Matrix>(const Vector& x_b,
                                          const Vector& x_c)>
      jacobian;
  Matrix R;
};

struct GssmPriors {
  /// Belief over x_b. Empty (dimension 0) when the partition has no
  /// constant block.
  GaussianBelief constant;
  /// Belief over the oldest x_c.
  GaussianBelief oldest;
};

struct GssmOptions {
  std::size_t window = 10;
  PriorMode prior_mode = PriorMode::PaperDiagonal;
  GaussNewtonOptions gauss_newton;
};

struct GssmEstimate {
  int step = 0;
  Vector x_c;
  Vector x_c_variance;
  Vector x_b;
  Vector x_b_variance;
};

class GssmWindow {
 public:
  static constexpr VarId constant_id() { return VarId{0}; }
  static VarId state_id(int step) {
    return VarId{static_cast<std::uint32_t>(step + 1)};
  }

  /// Starts an empty window at step `first_step` anchored by `priors`.
  /// Without `model` the measurement rows use the system's C_c and C_b.
  GssmWindow(PartitionedDiscreteSystem sys, const GssmPriors& priors,
             GssmOptions options,
             std::optional<PartitionedMeasurementModel> model = {},
             int first_step = 0);

  /// Adds the transition into the next x_c and its measurement, first
  /// marginalizing the oldest x_c when the window already spans w steps.
  void append(const Vector& u, const Vector& y);

  /// Runs Gauss-Newton over the window and moves the linearization point to
  /// the result.
  const SolveResult& solve();

  /// Newest x_c and current x_b with marginal variances from the last solve.
  GssmEstimate estimate() const;

  const FactorWindow& factor_window() const { return window_; }
  const PartitionedDiscreteSystem& system() const { return sys_; }
  const GssmOptions& options() const { return options_; }
  const std::optional<SolveResult>& last_solve() const { return last_; }
  Index n_b() const { return sys_.n_b(); }
  Index n_c() const { return sys_.n_c(); }
  int oldest_step() const { return oldest_step_; }
  int newest_step() const { return newest_step_; }
  /// Number of transition/measurement pairs currently in the window.
  std::size_t length() const {
    return static_cast<std::size_t>(newest_step_ - oldest_step_);
  }

 private:
  PartitionedDiscreteSystem sys_;
  GssmOptions options_;
  std::optional<PartitionedMeasurementModel> model_;
  FactorWindow window_;
  std::optional<SolveResult> last_;
  int oldest_step_ = 0;
  int newest_step_ = 0;
};

/// Builds a window over measurements[0..] with inputs[0..], anchored at the
/// priors. Streams longer than w slide the window.
GssmWindow build_gssm_window(
    const PartitionedDiscreteSystem& sys, const GssmPriors& priors,
    std::span<const Vector> measurements, std::span<const Vector> inputs,
    std::size_t w, PriorMode mode = PriorMode::PaperDiagonal,
    std::optional<PartitionedMeasurementModel> model = {});

/// Appends (u, y), solves, and reports the newest estimate.
std::pair<GssmWindow, GssmEstimate> gssm_step(GssmWindow window,
                                              const Vector& y,
                                              const Vector& u);

/// Runs a GSSM window over full streams, one estimate per measurement.
std::vector<GssmEstimate> run_gssm(
    const PartitionedDiscreteSystem& sys, const GssmPriors& priors,
    std::span<const Vector> inputs, std::span<const Vector> measurements,
    const GssmOptions& options = {},
    const std::optional<PartitionedMeasurementModel>& model = {});

struct DimensionEntry {
  std::string estimator;
  // Closed-form window sizes without the oldest-state prior rows.
  Index table_rows = 0;
  Index table_cols = 0;
  Index table_b = 0;
  Index table_x = 0;
  // Shapes of the matrices actually assembled (prior rows included).
  Index assembled_rows = 0;
  Index assembled_cols = 0;
  Index assembled_b = 0;
  Index assembled_x = 0;
};

struct DimensionReport {
  Index n_b = 0;
  Index n_c = 0;
  Index m = 0;
  Index w = 0;
  DimensionEntry unified;  ///< sliding-window filter over [x_c, x_b](k..k+w)
  DimensionEntry gssm;

  std::string to_text() const;
};

/// Table sizes plus the shapes of freshly assembled unified and GSSM windows
/// of length w. n_b may be zero; n_c, m, w must be positive.
DimensionReport dimension_report(Index n_b, Index n_c, Index m, Index w);

}  // namespace gssm_lab
