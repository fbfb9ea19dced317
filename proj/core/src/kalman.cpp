#include "gssm_lab/kalman.hpp"

#include <sstream>

namespace gssm_lab {

namespace {

void check_update_dims(const KalmanState& state, const Matrix& C,
                       const Matrix& R, const Vector& y) {
  const Index n = state.belief.dim();
  if (C.cols() != n || C.rows() != y.size() || R.rows() != y.size() ||
      R.cols() != y.size()) {
    std::ostringstream os;
    os << "measurement update: C is " << C.rows() << "x" << C.cols()
       << ", R is " << R.rows() << "x" << R.cols() << ", y has " << y.size()
       << " entries, state has " << n;
    throw DimensionError(os.str());
  }
}

KalmanState apply_gain(const KalmanState& state, const Matrix& C,
                       const Matrix& R, const Vector& innovation,
                       CovarianceUpdate mode) {
  const Matrix& P = state.belief.covariance();
  const Matrix S = symmetrize(C * P * C.transpose() + R);
  Eigen::LDLT<Matrix> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      (ldlt.vectorD().array() <= 0.0).any()) {
    Eigen::JacobiSVD<Matrix> svd(S);
    const auto& sv = svd.singularValues();
    std::ostringstream os;
    os << "innovation covariance is singular (condition "
       << (sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY)
       << ")";
    throw NumericalError(os.str());
  }
  // K = P C^T S^-1, computed as (S^-1 C P)^T.
  const Matrix K = ldlt.solve(C * P).transpose();
  const Index n = P.rows();
  const Matrix IKC = Matrix::Identity(n, n) - K * C;

  Matrix P_new;
  if (mode == CovarianceUpdate::Joseph) {
    P_new = IKC * P * IKC.transpose() + K * R * K.transpose();
  } else {
    P_new = IKC * P;
  }
  KalmanState out{GaussianBelief(state.belief.mean() + K * innovation,
                                 symmetrize(P_new), state.belief.blocks()),
                  state.step};
  return out;
}

}  // namespace

KalmanState kf_predict(const KalmanState& state,
                       const DiscreteLinearSystem& sys, const Vector& u) {
  const Index n = state.belief.dim();
  if (sys.F.rows() != n || sys.F.cols() != n || sys.Q.rows() != n ||
      sys.B.rows() != n || sys.B.cols() != u.size()) {
    throw DimensionError("kf_predict: system does not match state/input");
  }
  const Matrix& P = state.belief.covariance();
  Vector mean = sys.F * state.belief.mean();
  if (u.size() > 0) mean += sys.B * u;
  Matrix cov = symmetrize(sys.F * P * sys.F.transpose() + sys.Q);
  return KalmanState{
      GaussianBelief(std::move(mean), std::move(cov), state.belief.blocks()),
      state.step + 1};
}

KalmanState kf_update(const KalmanState& state, const Matrix& C,
                      const Matrix& R, const Vector& y,
                      CovarianceUpdate mode) {
  check_update_dims(state, C, R, y);
  return apply_gain(state, C, R, y - C * state.belief.mean(), mode);
}

KalmanState ekf_update(const KalmanState& state,
                       const NonlinearMeasurementModel& model, const Vector& y,
                       CovarianceUpdate mode) {
  const Vector& x = state.belief.mean();
  const Matrix C = model.jacobian(x);
  check_update_dims(state, C, model.R, y);
  return apply_gain(state, C, model.R, y - model.h(x), mode);
}

namespace {

template <typename Update>
StateTrack run_filter(const GaussianBelief& init,
                      const DiscreteLinearSystem& sys,
                      std::span<const Vector> inputs,
                      std::span<const Vector> measurements, Update&& update) {
  if (inputs.size() != measurements.size()) {
    throw DimensionError("input and measurement streams differ in length");
  }
  StateTrack track;
  track.reserve(measurements.size());
  KalmanState state{init, 0};
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    state = kf_predict(state, sys, inputs[k]);
    state = update(state, measurements[k]);
    track.push_back(StepEstimate{state.step, state.belief.mean(),
                                 state.belief.covariance().diagonal()});
  }
  return track;
}

}  // namespace

StateTrack run_kalman(const GaussianBelief& init,
                      const DiscreteLinearSystem& sys,
                      std::span<const Vector> inputs,
                      std::span<const Vector> measurements,
                      CovarianceUpdate mode) {
  return run_filter(init, sys, inputs, measurements,
                    [&](const KalmanState& s, const Vector& y) {
                      return kf_update(s, sys.C, sys.R, y, mode);
                    });
}

StateTrack run_ekf(const GaussianBelief& init, const DiscreteLinearSystem& sys,
                   const NonlinearMeasurementModel& model,
                   std::span<const Vector> inputs,
                   std::span<const Vector> measurements,
                   CovarianceUpdate mode) {
  return run_filter(init, sys, inputs, measurements,
                    [&](const KalmanState& s, const Vector& y) {
                      return ekf_update(s, model, y, mode);
                    });
}

}  // namespace gssm_lab
