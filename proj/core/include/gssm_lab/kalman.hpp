#pragma once

#include <span>
#include <vector>

#include "gssm_lab/ssm.hpp"

namespace gssm_lab {

struct KalmanState {
  GaussianBelief belief;
  int step = 0;
};

enum class CovarianceUpdate {
  Standard,  ///< P = (I - K C) P
  Joseph,    ///< P = (I - K C) P (I - K C)^T + K R K^T
};

/// Filtered estimate after consuming measurement `step`.
struct StepEstimate {
  int step = 0;
  Vector mean;
  Vector variance;  ///< covariance diagonal
};

using StateTrack = std::vector<StepEstimate>;

KalmanState kf_predict(const KalmanState& state,
                       const DiscreteLinearSystem& sys, const Vector& u);

/// Throws NumericalError when C P C^T + R is not positive definite.
KalmanState kf_update(const KalmanState& state, const Matrix& C,
                      const Matrix& R, const Vector& y,
                      CovarianceUpdate mode = CovarianceUpdate::Standard);

/// Linearizes the measurement at the current (predicted) mean and applies
/// the nonlinear innovation y - h(x).
KalmanState ekf_update(const KalmanState& state,
                       const NonlinearMeasurementModel& model, const Vector& y,
                       CovarianceUpdate mode = CovarianceUpdate::Standard);

/// Alternating predict/update over the streams. inputs[k] drives the
/// transition into the state measured by measurements[k].
StateTrack run_kalman(const GaussianBelief& init,
                      const DiscreteLinearSystem& sys,
                      std::span<const Vector> inputs,
                      std::span<const Vector> measurements,
                      CovarianceUpdate mode = CovarianceUpdate::Standard);

/// Same as run_kalman with an EKF measurement update.
StateTrack run_ekf(const GaussianBelief& init, const DiscreteLinearSystem& sys,
                   const NonlinearMeasurementModel& model,
                   std::span<const Vector> inputs,
                   std::span<const Vector> measurements,
                   CovarianceUpdate mode = CovarianceUpdate::Standard);

}  // namespace gssm_lab
