#include "gssm_lab/factor_window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace gssm_lab {

const char* to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Prior: return "prior";
    case FactorKind::Between: return "between";
    case FactorKind::MeasurementLinear: return "measurement-linear";
    case FactorKind::MeasurementRelinearizable:
      return "measurement-relinearizable";
  }
  return "unknown";
}

const char* to_string(PriorMode mode) {
  return mode == PriorMode::PaperDiagonal ? "paper-diagonal" : "exact-joint";
}

// ---------------------------------------------------------------- Factor

void Factor::finish() {
  require_symmetric(noise_, "factor noise", 1e-9);
  noise_ = symmetrize(noise_);
  noise_llt_.compute(noise_);
  if (noise_llt_.info() != Eigen::Success) {
    throw DimensionError(std::string(to_string(kind_)) +
                         " factor noise must be positive definite");
  }
  if (vars_.size() != dims_.size()) {
    throw DimensionError("factor variable/dimension lists differ in length");
  }
  if (kind_ != FactorKind::MeasurementRelinearizable) {
    if (blocks_.size() != vars_.size()) {
      throw DimensionError("factor needs one coefficient block per variable");
    }
    for (const auto& B : blocks_) {
      if (B.rows() != rhs_.size()) {
        throw DimensionError("factor coefficient rows must match rhs length");
      }
    }
  }
  if (rhs_.size() != noise_.rows()) {
    throw DimensionError("factor noise side must match rhs length");
  }
}

Factor Factor::prior(VarId id, Vector mean, Matrix covariance) {
  const Index d = mean.size();
  return linear(FactorKind::Prior, {id}, {Matrix::Identity(d, d)},
                std::move(mean), std::move(covariance));
}

Factor Factor::prior(const GaussianBelief& belief) {
  std::vector<VarId> vars;
  std::vector<Matrix> blocks;
  const Index d = belief.dim();
  Index offset = 0;
  for (const auto& b : belief.blocks()) {
    vars.push_back(b.id);
    Matrix block = Matrix::Zero(d, b.dim);
    block.middleRows(offset, b.dim).setIdentity();
    blocks.push_back(std::move(block));
    offset += b.dim;
  }
  return linear(FactorKind::Prior, std::move(vars), std::move(blocks),
                belief.mean(), belief.covariance());
}

Factor Factor::between(VarId from, VarId to, const Matrix& F, Vector rhs,
                       Matrix noise) {
  if (F.rows() != F.cols()) {
    throw DimensionError("between factor transition must be square");
  }
  const Index n = F.rows();
  return linear(FactorKind::Between, {from, to},
                {-F, Matrix::Identity(n, n)}, std::move(rhs),
                std::move(noise));
}

Factor Factor::linear(FactorKind kind, std::vector<VarId> vars,
                      std::vector<Matrix> blocks, Vector rhs, Matrix noise) {
  if (kind == FactorKind::MeasurementRelinearizable) {
    throw DimensionError("use Factor::relinearizable for nonlinear factors");
  }
  Factor f;
  f.kind_ = kind;
  f.vars_ = std::move(vars);
  for (const auto& B : blocks) f.dims_.push_back(B.cols());
  f.blocks_ = std::move(blocks);
  f.rhs_ = std::move(rhs);
  f.noise_ = std::move(noise);
  f.finish();
  return f;
}

Factor Factor::relinearizable(std::vector<VarId> vars, std::vector<Index> dims,
                              Predict h, Jacobians jacobians, Vector y,
                              Matrix noise) {
  if (!h || !jacobians) {
    throw DimensionError("relinearizable factor needs h and its Jacobians");
  }
  Factor f;
  f.kind_ = FactorKind::MeasurementRelinearizable;
  f.vars_ = std::move(vars);
  f.dims_ = std::move(dims);
  f.h_ = std::move(h);
  f.jacobians_ = std::move(jacobians);
  f.rhs_ = std::move(y);
  f.noise_ = std::move(noise);
  f.finish();
  return f;
}

bool Factor::touches(VarId id) const {
  return std::find(vars_.begin(), vars_.end(), id) != vars_.end();
}

Factor::Rows Factor::linearize(std::span<const Vector> values) const {
  if (!is_relinearizable()) return Rows{blocks_, rhs_};
  if (values.size() != vars_.size()) {
    throw DimensionError("linearize: wrong number of variable values");
  }
  Rows rows{jacobians_(values), rhs_ - h_(values)};
  if (rows.blocks.size() != vars_.size()) {
    throw DimensionError("Jacobian callback returned wrong block count");
  }
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const Matrix& J = rows.blocks[i];
    if (J.rows() != rows.rhs.size() || J.cols() != dims_[i]) {
      throw DimensionError("Jacobian block has wrong shape");
    }
    rows.rhs += J * values[i];
  }
  return rows;
}

Vector Factor::residual(std::span<const Vector> values) const {
  if (values.size() != vars_.size()) {
    throw DimensionError("residual: wrong number of variable values");
  }
  if (is_relinearizable()) return rhs_ - h_(values);
  Vector r = rhs_;
  for (std::size_t i = 0; i < vars_.size(); ++i) r -= blocks_[i] * values[i];
  return r;
}

double Factor::weighted_error(std::span<const Vector> values) const {
  const Vector r = residual(values);
  return r.dot(noise_llt_.solve(r));
}

Vector Factor::solve_for(VarId id, std::span<const Vector> values) const {
  const auto it = std::find(vars_.begin(), vars_.end(), id);
  if (it == vars_.end()) {
    throw DimensionError("factor does not reference " + to_string(id));
  }
  const auto target = static_cast<std::size_t>(it - vars_.begin());
  const Rows rows = linearize(values);
  Vector rhs = rows.rhs;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (i != target) rhs -= rows.blocks[i] * values[i];
  }
  const Matrix& B = rows.blocks[target];
  return B.colPivHouseholderQr().solve(rhs);
}

// ----------------------------------------------------------- FactorWindow

void FactorWindow::add_variable(VarId id, const Vector& initial,
                                VariableRole role) {
  if (contains(id)) {
    throw DimensionError("window already holds " + to_string(id));
  }
  variables_.push_back(VariableBlock{id, initial.size(), role});
  Vector next(point_.size() + initial.size());
  next << point_, initial;
  point_ = std::move(next);
}

void FactorWindow::remove_variable(VarId id) {
  for (const auto& f : factors_) {
    if (f.touches(id)) {
      throw DimensionError("cannot remove " + to_string(id) +
                           ": still referenced by a factor");
    }
  }
  const Index offset = offset_of(id);
  const Index d = variable(id).dim;
  Vector next(point_.size() - d);
  next << point_.head(offset), point_.tail(point_.size() - offset - d);
  point_ = std::move(next);
  std::erase_if(variables_, [id](const VariableBlock& v) { return v.id == id; });
}

void FactorWindow::add_factor(Factor factor) {
  for (std::size_t i = 0; i < factor.vars().size(); ++i) {
    const VarId id = factor.vars()[i];
    if (!contains(id)) {
      throw DimensionError(std::string(to_string(factor.kind())) +
                           " factor references unknown variable " +
                           to_string(id));
    }
    if (variable(id).dim != factor.dims()[i]) {
      throw DimensionError("factor block width does not match " +
                           to_string(id));
    }
  }
  factors_.push_back(std::move(factor));
}

void FactorWindow::prepend_factor(Factor factor) {
  add_factor(std::move(factor));
  std::rotate(factors_.rbegin(), factors_.rbegin() + 1, factors_.rend());
}

std::vector<Factor> FactorWindow::extract_factors(
    const std::function<bool(const Factor&)>& pred) {
  std::vector<Factor> taken;
  std::vector<Factor> kept;
  for (auto& f : factors_) {
    (pred(f) ? taken : kept).push_back(std::move(f));
  }
  factors_ = std::move(kept);
  return taken;
}

bool FactorWindow::contains(VarId id) const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [id](const VariableBlock& v) { return v.id == id; });
}

const VariableBlock& FactorWindow::variable(VarId id) const {
  for (const auto& v : variables_) {
    if (v.id == id) return v;
  }
  throw DimensionError("window has no variable " + to_string(id));
}

Index FactorWindow::offset_of(VarId id) const {
  Index offset = 0;
  for (const auto& v : variables_) {
    if (v.id == id) return offset;
    offset += v.dim;
  }
  throw DimensionError("window has no variable " + to_string(id));
}

Index FactorWindow::row_count() const {
  Index rows = 0;
  for (const auto& f : factors_) rows += f.rows();
  return rows;
}

void FactorWindow::set_linearization_point(const Vector& point) {
  if (point.size() != point_.size()) {
    throw DimensionError("linearization point has wrong length");
  }
  point_ = point;
}

Vector FactorWindow::value_of(VarId id, const Vector& stacked) const {
  return stacked.segment(offset_of(id), variable(id).dim);
}

std::vector<VarId> FactorWindow::time_varying() const {
  std::vector<VarId> out;
  for (const auto& v : variables_) {
    if (v.role == VariableRole::TimeVarying) out.push_back(v.id);
  }
  return out;
}

std::size_t FactorWindow::step_count() const {
  const auto n = time_varying().size();
  return n == 0 ? 0 : n - 1;
}

bool FactorWindow::at_capacity() const {
  return capacity_ != 0 && step_count() >= capacity_;
}

bool FactorWindow::has_relinearizable() const {
  return std::any_of(factors_.begin(), factors_.end(),
                     [](const Factor& f) { return f.is_relinearizable(); });
}

std::vector<Vector> FactorWindow::gather(const Factor& factor,
                                         const Vector& X) const {
  std::vector<Vector> values;
  values.reserve(factor.vars().size());
  for (const VarId id : factor.vars()) values.push_back(value_of(id, X));
  return values;
}

double FactorWindow::objective(const Vector& X) const {
  double total = 0.0;
  for (const auto& f : factors_) total += f.weighted_error(gather(f, X));
  return total;
}

// ---------------------------------------------------------------- assemble

namespace {

void require_anchored(const FactorWindow& window) {
  const auto& vars = window.variables();
  std::vector<std::size_t> parent(vars.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto index_of = [&](VarId id) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].id == id) return i;
    }
    return vars.size();
  };
  for (const auto& f : window.factors()) {
    const std::size_t first = find(index_of(f.vars().front()));
    for (const VarId id : f.vars()) parent[find(index_of(id))] = first;
  }
  std::vector<bool> anchored(vars.size(), false);
  for (const auto& f : window.factors()) {
    if (f.kind() == FactorKind::Prior) anchored[find(index_of(f.vars()[0]))] = true;
  }
  std::ostringstream unanchored;
  bool any = false;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].dim > 0 && !anchored[find(i)]) {
      unanchored << (any ? ", " : "") << to_string(vars[i].id);
      any = true;
    }
  }
  if (any) {
    throw RankDeficientError(
        "unanchored variables (no prior factor in their component): " +
            unanchored.str(),
        0.0);
  }
}

}  // namespace

LinearSystem assemble(const FactorWindow& window) {
  return assemble(window, window.linearization_point());
}

LinearSystem assemble(const FactorWindow& window, const Vector& at) {
  if (at.size() != window.dim()) {
    throw DimensionError("assemble: point has wrong length");
  }
  require_anchored(window);
  const Index rows = window.row_count();
  LinearSystem sys{Matrix::Zero(rows, window.dim()), Matrix::Zero(rows, rows),
                   Vector::Zero(rows)};
  Index row = 0;
  for (const auto& f : window.factors()) {
    const auto values = window.gather(f, at);
    const Factor::Rows lin = f.linearize(values);
    const Index r = f.rows();
    for (std::size_t i = 0; i < f.vars().size(); ++i) {
      sys.A.block(row, window.offset_of(f.vars()[i]), r, f.dims()[i]) +=
          lin.blocks[i];
    }
    sys.P.block(row, row, r, r) = f.noise();
    sys.b.segment(row, r) = lin.rhs;
    row += r;
  }
  return sys;
}

// ------------------------------------------------------------------- solve

SolveResult solve_normal_equations(const Matrix& A, const Matrix& P,
                                   const Vector& b) {
  if (P.rows() != A.rows() || P.cols() != A.rows() || b.size() != A.rows()) {
    throw DimensionError("solve_normal_equations: inconsistent shapes");
  }
  if (A.rows() < A.cols()) {
    throw RankDeficientError("fewer rows than unknowns", 0.0);
  }
  Eigen::LLT<Matrix> llt(P);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("noise covariance P_w is not positive definite");
  }
  const Matrix Aw = llt.matrixL().solve(A);
  const Vector bw = llt.matrixL().solve(b);

  Eigen::ColPivHouseholderQR<Matrix> qr(Aw);
  if (qr.rank() < A.cols()) {
    Eigen::JacobiSVD<Matrix> svd(Aw);
    const double smallest = svd.singularValues().minCoeff();
    std::ostringstream os;
    os << "weighted normal equations are rank deficient (rank " << qr.rank()
       << " of " << A.cols() << ", smallest singular value " << smallest
       << ")";
    throw RankDeficientError(os.str(), smallest);
  }

  SolveResult out;
  out.estimate = qr.solve(bw);
  out.information = symmetrize(Aw.transpose() * Aw);
  out.objective = (Aw * out.estimate - bw).squaredNorm();
  out.iterations = 1;
  out.converged = true;
  return out;
}

SolveResult gauss_newton(const FactorWindow& window,
                         const GaussNewtonOptions& options) {
  Vector X = window.linearization_point();
  double objective = window.objective(X);
  std::vector<double> history{objective};

  if (!window.has_relinearizable()) {
    const LinearSystem sys = assemble(window, X);
    SolveResult out = solve_normal_equations(sys.A, sys.P, sys.b);
    out.objective = window.objective(out.estimate);
    history.push_back(out.objective);
    out.objective_history = std::move(history);
    return out;
  }

  int iterations = 0;
  bool converged = false;
  for (int it = 1; it <= options.max_iter; ++it) {
    const LinearSystem sys = assemble(window, X);
    const Vector delta =
        solve_normal_equations(sys.A, sys.P, sys.b).estimate - X;

    double scale = 1.0;
    double candidate_objective = 0.0;
    Vector candidate;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h) {
      candidate = X + scale * delta;
      candidate_objective = window.objective(candidate);
      if (candidate_objective <= objective) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    iterations = it;
    if (!accepted) {
      // No descent left along the step: either we already sit at the
      // minimum up to rounding, or the model is broken.
      const double excess = candidate_objective - objective;
      if (delta.norm() < options.tol ||
          excess <= 1e-9 * std::max(1.0, objective)) {
        converged = true;
        break;
      }
      std::ostringstream os;
      os << "Gauss-Newton objective increased by " << excess << " after "
         << options.max_halvings << " step halvings";
      throw NumericalError(os.str());
    }
    X = std::move(candidate);
    objective = candidate_objective;
    history.push_back(objective);
    if ((scale * delta).norm() < options.tol) {
      converged = true;
      break;
    }
  }

  const LinearSystem final_sys = assemble(window, X);
  Eigen::LLT<Matrix> llt(final_sys.P);
  const Matrix Aw = llt.matrixL().solve(final_sys.A);

  SolveResult out;
  out.estimate = std::move(X);
  out.information = symmetrize(Aw.transpose() * Aw);
  out.objective = objective;
  out.iterations = iterations;
  out.converged = converged;
  out.objective_history = std::move(history);
  return out;
}

// ------------------------------------------------------------ marginalize

GaussianBelief marginalize(const Matrix& info, const Vector& mean,
                           std::span<const GaussianBelief::Block> blocks,
                           std::span<const VarId> keep,
                           std::span<const VarId> drop) {
  if (info.rows() != info.cols() || info.rows() != mean.size()) {
    throw DimensionError("marginalize: information/mean shapes differ");
  }
  std::vector<Index> offsets;
  Index total = 0;
  for (const auto& b : blocks) {
    offsets.push_back(total);
    total += b.dim;
  }
  if (total != mean.size()) {
    throw DimensionError("marginalize: blocks do not cover the state");
  }
  if (keep.size() + drop.size() != blocks.size()) {
    throw DimensionError("marginalize: keep and drop must partition the blocks");
  }

  auto indices_for = [&](std::span<const VarId> ids,
                         std::vector<GaussianBelief::Block>* out_blocks) {
    std::vector<Index> idx;
    for (const VarId id : ids) {
      std::size_t j = 0;
      while (j < blocks.size() && blocks[j].id != id) ++j;
      if (j == blocks.size()) {
        throw DimensionError("marginalize: unknown block " + to_string(id));
      }
      if (out_blocks) out_blocks->push_back(blocks[j]);
      for (Index k = 0; k < blocks[j].dim; ++k) idx.push_back(offsets[j] + k);
    }
    return idx;
  };

  std::vector<GaussianBelief::Block> kept_blocks;
  const auto ki = indices_for(keep, &kept_blocks);
  const auto di = indices_for(drop, nullptr);

  const Matrix H_kk = info(ki, ki);
  const Matrix H_kd = info(ki, di);
  const Matrix H_dd = info(di, di);

  Matrix schur = H_kk;
  if (!di.empty()) {
    Eigen::LDLT<Matrix> ldlt(symmetrize(H_dd));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        (ldlt.vectorD().array() <= 0.0).any()) {
      throw NumericalError("marginalize: dropped information block is singular");
    }
    schur -= H_kd * ldlt.solve(H_kd.transpose());
  }
  schur = symmetrize(schur);

  Eigen::LDLT<Matrix> keep_ldlt(schur);
  if (keep_ldlt.info() != Eigen::Success || !keep_ldlt.isPositive() ||
      (keep_ldlt.vectorD().array() <= 0.0).any()) {
    throw NumericalError("marginalize: marginal information is singular");
  }
  const Index dk = static_cast<Index>(ki.size());
  Matrix cov = keep_ldlt.solve(Matrix::Identity(dk, dk));
  return GaussianBelief(mean(ki), symmetrize(cov), std::move(kept_blocks));
}

void marginalize_oldest(FactorWindow& window, PriorMode mode) {
  const auto states = window.time_varying();
  if (states.empty()) return;
  const VarId oldest = states.front();

  // Separator: every variable sharing a factor with the oldest state.
  std::vector<VarId> separator;
  for (const auto& f : window.factors()) {
    if (!f.touches(oldest)) continue;
    for (const VarId id : f.vars()) {
      if (id != oldest &&
          std::find(separator.begin(), separator.end(), id) == separator.end()) {
        separator.push_back(id);
      }
    }
  }
  // Keep window order for the separator so re-entered priors line up with
  // the column layout.
  std::vector<VarId> ordered;
  for (const auto& v : window.variables()) {
    if (std::find(separator.begin(), separator.end(), v.id) != separator.end()) {
      ordered.push_back(v.id);
    }
  }
  separator = std::move(ordered);

  std::vector<GaussianBelief::Block> local_blocks{
      {oldest, window.variable(oldest).dim}};
  for (const VarId id : separator) {
    local_blocks.push_back({id, window.variable(id).dim});
  }
  auto local_offset = [&](VarId id) {
    Index o = 0;
    for (const auto& b : local_blocks) {
      if (b.id == id) return o;
      o += b.dim;
    }
    return o;
  };
  auto in_local = [&](VarId id) {
    return std::any_of(local_blocks.begin(), local_blocks.end(),
                       [id](const auto& b) { return b.id == id; });
  };

  auto absorbed = window.extract_factors([&](const Factor& f) {
    return std::all_of(f.vars().begin(), f.vars().end(), in_local);
  });

  Index d = 0;
  for (const auto& b : local_blocks) d += b.dim;
  Matrix H = Matrix::Zero(d, d);
  Vector eta = Vector::Zero(d);
  const Vector& point = window.linearization_point();
  for (const auto& f : absorbed) {
    const auto values = window.gather(f, point);
    const Factor::Rows rows = f.linearize(values);
    Matrix A = Matrix::Zero(f.rows(), d);
    for (std::size_t i = 0; i < f.vars().size(); ++i) {
      A.middleCols(local_offset(f.vars()[i]), f.dims()[i]) = rows.blocks[i];
    }
    const Eigen::LLT<Matrix> llt(f.noise());
    const Matrix AtWinv = llt.solve(A).transpose();
    H += AtWinv * A;
    eta += AtWinv * rows.rhs;
  }
  H = symmetrize(H);
  Eigen::LDLT<Matrix> ldlt(H);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("marginalization subsystem is singular");
  }
  const Vector joint_mean = ldlt.solve(eta);

  const VarId drop[] = {oldest};
  const GaussianBelief marginal =
      marginalize(H, joint_mean, local_blocks, separator, drop);

  window.remove_variable(oldest);

  if (mode == PriorMode::ExactJoint || separator.size() <= 1) {
    window.prepend_factor(Factor::prior(marginal));
  } else {
    for (auto it = separator.rbegin(); it != separator.rend(); ++it) {
      window.prepend_factor(Factor::prior(*it, marginal.block_mean(*it),
                                          marginal.block_covariance(*it)));
    }
  }
}

FactorWindow slide(FactorWindow window, const Factor& between,
                   const std::optional<Factor>& measurement, PriorMode mode) {
  VarId fresh{};
  Index fresh_dim = 0;
  int missing = 0;
  for (std::size_t i = 0; i < between.vars().size(); ++i) {
    if (!window.contains(between.vars()[i])) {
      fresh = between.vars()[i];
      fresh_dim = between.dims()[i];
      ++missing;
    }
  }
  if (missing != 1) {
    throw DimensionError(
        "slide: the transition factor must introduce exactly one new state");
  }

  if (window.at_capacity()) marginalize_oldest(window, mode);

  std::vector<Vector> values;
  for (const VarId id : between.vars()) {
    values.push_back(id == fresh ? Vector::Zero(fresh_dim)
                                 : window.value_of(id));
  }
  window.add_variable(fresh, between.solve_for(fresh, values));
  window.add_factor(between);
  if (measurement) window.add_factor(*measurement);
  return window;
}

// --------------------------------------------------------- SlidingWindowFgo

SlidingWindowFgo::SlidingWindowFgo(
    const GaussianBelief& initial, DiscreteLinearSystem sys,
    SlidingWindowOptions options,
    std::optional<NonlinearMeasurementModel> measurement)
    : sys_(std::move(sys)),
      options_(options),
      model_(std::move(measurement)),
      window_(options.window) {
  sys_.validate();
  if (options_.window == 0) {
    throw DimensionError("sliding window length must be at least 1");
  }
  if (initial.dim() != sys_.state_dim()) {
    throw DimensionError("initial belief does not match the state dimension");
  }
  const VarId x0 = state_id(0);
  window_.add_variable(x0, initial.mean());
  window_.add_factor(Factor::prior(x0, initial.mean(), initial.covariance()));
}

StepEstimate SlidingWindowFgo::step(const Vector& u, const Vector& y) {
  const VarId prev = state_id(step_);
  const VarId next = state_id(step_ + 1);
  Vector rhs = Vector::Zero(sys_.state_dim());
  if (u.size() > 0) rhs = sys_.B * u;
  Factor between = Factor::between(prev, next, sys_.F, rhs, sys_.Q);

  std::optional<Factor> meas;
  if (model_) {
    const NonlinearMeasurementModel model = *model_;
    meas = Factor::relinearizable(
        {next}, {sys_.state_dim()},
        [model](std::span<const Vector> v) { return model.h(v[0]); },
        [model](std::span<const Vector> v) {
          return std::vector<Matrix>{model.jacobian(v[0])};
        },
        y, model.R);
  } else {
    meas = Factor::linear(FactorKind::MeasurementLinear, {next}, {sys_.C}, y,
                          sys_.R);
  }

  window_ = slide(std::move(window_), between, meas, options_.prior_mode);

  if (options_.iterate) {
    last_ = gauss_newton(window_, options_.gauss_newton);
  } else {
    const LinearSystem lin = assemble(window_);
    last_ = solve_normal_equations(lin.A, lin.P, lin.b);
    last_.objective = window_.objective(last_.estimate);
  }
  window_.set_linearization_point(last_.estimate);
  ++step_;

  const Index offset = window_.offset_of(next);
  const Index n = sys_.state_dim();
  const Matrix cov = last_.information.ldlt().solve(
      Matrix::Identity(window_.dim(), window_.dim()));
  return StepEstimate{step_, last_.estimate.segment(offset, n),
                      cov.diagonal().segment(offset, n)};
}

StateTrack run_sliding_window(
    const GaussianBelief& initial, const DiscreteLinearSystem& sys,
    std::span<const Vector> inputs, std::span<const Vector> measurements,
    const SlidingWindowOptions& options,
    const std::optional<NonlinearMeasurementModel>& measurement) {
  if (inputs.size() != measurements.size()) {
    throw DimensionError("input and measurement streams differ in length");
  }
  SlidingWindowFgo fgo(initial, sys, options, measurement);
  StateTrack track;
  track.reserve(measurements.size());
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    track.push_back(fgo.step(inputs[k], measurements[k]));
  }
  return track;
}

}  // namespace gssm_lab
