#include "gssm_lab/gssm.hpp"

#include <sstream>

namespace gssm_lab {

GssmWindow::GssmWindow(PartitionedDiscreteSystem sys, const GssmPriors& priors,
                       GssmOptions options,
                       std::optional<PartitionedMeasurementModel> model,
                       int first_step)
    : sys_(std::move(sys)),
      options_(options),
      model_(std::move(model)),
      window_(options.window),
      oldest_step_(first_step),
      newest_step_(first_step) {
  sys_.validate();
  if (options_.window == 0) {
    throw DimensionError("GSSM window length must be at least 1");
  }
  if (priors.constant.dim() != sys_.n_b()) {
    throw DimensionError("x_b prior does not match n_b");
  }
  if (priors.oldest.dim() != sys_.n_c()) {
    throw DimensionError("x_c prior does not match n_c");
  }
  if (sys_.n_b() > 0) {
    window_.add_variable(constant_id(), priors.constant.mean(),
                         VariableRole::Constant);
    window_.add_factor(Factor::prior(constant_id(), priors.constant.mean(),
                                     priors.constant.covariance()));
  }
  const VarId first = state_id(first_step);
  window_.add_variable(first, priors.oldest.mean());
  window_.add_factor(
      Factor::prior(first, priors.oldest.mean(), priors.oldest.covariance()));
}

void GssmWindow::append(const Vector& u, const Vector& y) {
  const bool has_b = sys_.n_b() > 0;
  const VarId prev = state_id(newest_step_);
  const VarId next = state_id(newest_step_ + 1);
  const Index nc = sys_.n_c();

  if (y.size() != sys_.measurement_dim()) {
    throw DimensionError("GSSM measurement has wrong length");
  }
  Vector rhs = Vector::Zero(nc);
  if (u.size() > 0) {
    if (u.size() != sys_.B.cols()) {
      throw DimensionError("GSSM input has wrong length");
    }
    rhs = sys_.B * u;
  }

  std::vector<VarId> between_vars;
  std::vector<Matrix> between_blocks;
  if (has_b) {
    between_vars.push_back(constant_id());
    between_blocks.push_back(-sys_.F_b);
  }
  between_vars.insert(between_vars.end(), {prev, next});
  between_blocks.push_back(-sys_.F_c);
  between_blocks.push_back(Matrix::Identity(nc, nc));
  const Factor between =
      Factor::linear(FactorKind::Between, std::move(between_vars),
                     std::move(between_blocks), std::move(rhs), sys_.Q);

  std::vector<VarId> meas_vars;
  std::vector<Index> meas_dims;
  if (has_b) {
    meas_vars.push_back(constant_id());
    meas_dims.push_back(sys_.n_b());
  }
  meas_vars.push_back(next);
  meas_dims.push_back(nc);

  std::optional<Factor> meas;
  if (model_) {
    const PartitionedMeasurementModel model = *model_;
    const Index nb = sys_.n_b();
    auto split = [has_b, nb](std::span<const Vector> v) {
      return has_b ? std::pair<Vector, Vector>{v[0], v[1]}
                   : std::pair<Vector, Vector>{Vector::Zero(nb), v[0]};
    };
    meas = Factor::relinearizable(
        std::move(meas_vars), std::move(meas_dims),
        [model, split](std::span<const Vector> v) {
          const auto [xb, xc] = split(v);
          return model.h(xb, xc);
        },
        [model, split, has_b](std::span<const Vector> v) {
          const auto [xb, xc] = split(v);
          auto [Jb, Jc] = model.jacobian(xb, xc);
          return has_b ? std::vector<Matrix>{std::move(Jb), std::move(Jc)}
                       : std::vector<Matrix>{std::move(Jc)};
        },
        y, model.R);
  } else {
    std::vector<Matrix> blocks;
    if (has_b) blocks.push_back(sys_.C_b);
    blocks.push_back(sys_.C_c);
    meas = Factor::linear(FactorKind::MeasurementLinear, std::move(meas_vars),
                          std::move(blocks), y, sys_.R);
  }

  const bool slides = window_.at_capacity();
  window_ = slide(std::move(window_), between, meas, options_.prior_mode);
  if (slides) ++oldest_step_;
  ++newest_step_;
}

const SolveResult& GssmWindow::solve() {
  last_ = gauss_newton(window_, options_.gauss_newton);
  window_.set_linearization_point(last_->estimate);
  return *last_;
}

GssmEstimate GssmWindow::estimate() const {
  if (!last_) throw NumericalError("GSSM window has not been solved yet");
  const Index d = window_.dim();
  const Matrix cov =
      last_->information.ldlt().solve(Matrix::Identity(d, d));
  GssmEstimate out;
  out.step = newest_step_;
  const VarId newest = state_id(newest_step_);
  const Index oc = window_.offset_of(newest);
  out.x_c = last_->estimate.segment(oc, n_c());
  out.x_c_variance = cov.diagonal().segment(oc, n_c());
  if (n_b() > 0) {
    const Index ob = window_.offset_of(constant_id());
    out.x_b = last_->estimate.segment(ob, n_b());
    out.x_b_variance = cov.diagonal().segment(ob, n_b());
  } else {
    out.x_b = Vector::Zero(0);
    out.x_b_variance = Vector::Zero(0);
  }
  return out;
}

GssmWindow build_gssm_window(const PartitionedDiscreteSystem& sys,
                             const GssmPriors& priors,
                             std::span<const Vector> measurements,
                             std::span<const Vector> inputs, std::size_t w,
                             PriorMode mode,
                             std::optional<PartitionedMeasurementModel> model) {
  if (inputs.size() != measurements.size()) {
    throw DimensionError("input and measurement streams differ in length");
  }
  GssmOptions options;
  options.window = w;
  options.prior_mode = mode;
  GssmWindow window(sys, priors, options, std::move(model));
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    window.append(inputs[k], measurements[k]);
  }
  return window;
}

std::pair<GssmWindow, GssmEstimate> gssm_step(GssmWindow window,
                                              const Vector& y,
                                              const Vector& u) {
  window.append(u, y);
  window.solve();
  GssmEstimate est = window.estimate();
  return {std::move(window), std::move(est)};
}

std::vector<GssmEstimate> run_gssm(
    const PartitionedDiscreteSystem& sys, const GssmPriors& priors,
    std::span<const Vector> inputs, std::span<const Vector> measurements,
    const GssmOptions& options,
    const std::optional<PartitionedMeasurementModel>& model) {
  if (inputs.size() != measurements.size()) {
    throw DimensionError("input and measurement streams differ in length");
  }
  GssmWindow window(sys, priors, options, model);
  std::vector<GssmEstimate> out;
  out.reserve(measurements.size());
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    window.append(inputs[k], measurements[k]);
    window.solve();
    out.push_back(window.estimate());
  }
  return out;
}

// ------------------------------------------------------ dimension report

namespace {

GaussianBelief unit_belief(Index d) {
  return GaussianBelief(Vector::Zero(d), Matrix::Identity(d, d));
}

}  // namespace

DimensionReport dimension_report(Index n_b, Index n_c, Index m, Index w) {
  if (n_b < 0 || n_c <= 0 || m <= 0 || w <= 0) {
    throw DimensionError(
        "dimension report needs n_b >= 0 and positive n_c, m, w");
  }
  DimensionReport rep{n_b, n_c, m, w, {}, {}};
  const Index n = n_b + n_c;

  rep.unified.estimator = "sliding-window KF";
  rep.unified.table_rows = (n_b + n_c + m) * w;
  rep.unified.table_cols = n * (w + 1);
  rep.unified.table_b = (n_b + n_c + m) * w;
  rep.unified.table_x = n * (w + 1);

  rep.gssm.estimator = "GSSM";
  rep.gssm.table_rows = n_b + (n_c + m) * w;
  rep.gssm.table_cols = n_b + n_c * (w + 1);
  rep.gssm.table_b = n_b + (n_c + m) * w;
  rep.gssm.table_x = n_b + n_c * (w + 1);

  const auto steps = static_cast<std::size_t>(w);
  std::vector<Vector> inputs(steps, Vector::Zero(0));

  // Unified window over the full state.
  {
    FactorWindow window(steps);
    window.add_variable(SlidingWindowFgo::state_id(0), Vector::Zero(n));
    window.add_factor(Factor::prior(SlidingWindowFgo::state_id(0),
                                    Vector::Zero(n), Matrix::Identity(n, n)));
    for (Index k = 0; k < w; ++k) {
      const VarId prev = SlidingWindowFgo::state_id(static_cast<int>(k));
      const VarId next = SlidingWindowFgo::state_id(static_cast<int>(k + 1));
      window = slide(std::move(window),
                     Factor::between(prev, next, Matrix::Identity(n, n),
                                     Vector::Zero(n), Matrix::Identity(n, n)),
                     Factor::linear(FactorKind::MeasurementLinear, {next},
                                    {Matrix::Ones(m, n)}, Vector::Zero(m),
                                    Matrix::Identity(m, m)),
                     PriorMode::ExactJoint);
    }
    const LinearSystem sys = assemble(window);
    rep.unified.assembled_rows = sys.A.rows();
    rep.unified.assembled_cols = sys.A.cols();
    rep.unified.assembled_b = sys.b.size();
    rep.unified.assembled_x = window.dim();
  }

  // GSSM window.
  {
    PartitionedDiscreteSystem sys;
    sys.F_c = Matrix::Identity(n_c, n_c);
    sys.F_b = Matrix::Ones(n_c, n_b);
    sys.B = Matrix::Zero(n_c, 0);
    sys.C_c = Matrix::Ones(m, n_c);
    sys.C_b = Matrix::Ones(m, n_b);
    sys.Q = Matrix::Identity(n_c, n_c);
    sys.R = Matrix::Identity(m, m);
    sys.T = 1.0;
    std::vector<Vector> ys(steps, Vector::Zero(m));
    const GssmWindow window = build_gssm_window(
        sys, GssmPriors{unit_belief(n_b), unit_belief(n_c)}, ys, inputs,
        steps);
    const LinearSystem lin = assemble(window.factor_window());
    rep.gssm.assembled_rows = lin.A.rows();
    rep.gssm.assembled_cols = lin.A.cols();
    rep.gssm.assembled_b = lin.b.size();
    rep.gssm.assembled_x = window.factor_window().dim();
  }
  return rep;
}

std::string DimensionReport::to_text() const {
  std::ostringstream os;
  os << "n_b=" << n_b << " n_c=" << n_c << " m=" << m << " w=" << w << "\n";
  for (const DimensionEntry* e : {&unified, &gssm}) {
    os << e->estimator << "\n"
       << "  table:     A_w " << e->table_rows << "x" << e->table_cols
       << "  b_w " << e->table_b << "  X_w " << e->table_x << "\n"
       << "  assembled: A_w " << e->assembled_rows << "x" << e->assembled_cols
       << "  b_w " << e->assembled_b << "  X_w " << e->assembled_x << "\n";
  }
  return os.str();
}

}  // namespace gssm_lab
