#include "dgflow/ripcs.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace dgflow {

using Eigen::MatrixXd;
using Eigen::VectorXd;

DIRKTableau DIRKTableau::alexander() {
  const double g = 1.0 - std::sqrt(2.0) / 2.0;
  return {{{g, 0.0}, {1.0 - g, g}}, {1.0 - g, g}, {g, 1.0}};
}

namespace {

ProjectionConfig projection_config(const DGForms& forms, ProjectionConfig cfg) {
  cfg.nu = forms.config().mu / forms.config().rho;
  return cfg;
}

DGField with_coeffs(const DGField& shape, const VectorXd& c) {
  DGField f = shape.zeros_like();
  f.coeffs = c;
  return f;
}

}  // namespace

PressureCorrectionStepper::PressureCorrectionStepper(const DGForms& forms, SplittingConfig config)
    : forms_(&forms), config_(std::move(config)), tableau_(DIRKTableau::alexander()),
      projector_(forms, projection_config(forms, config_.projection)) {
  if (!(config_.omega > 0.0)) throw std::invalid_argument("PressureCorrectionStepper: omega <= 0");
}

DGField PressureCorrectionStepper::momentum_residual(const DGField& v, const DGField& p,
                                                     double t) const {
  DGField r = forms_->rhs_l(t);
  r.coeffs -= forms_->apply_a(v).coeffs;
  r.coeffs -= forms_->apply_bt(p).coeffs;
  if (config_.model == FlowModel::NavierStokes)
    r.coeffs -= forms_->config().rho * forms_->apply_c(v, t).coeffs;
  return r;
}

void PressureCorrectionStepper::prepare(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("PressureCorrectionStepper: dt must be positive");
  if (dt == prepared_dt_) return;
  projector_.set_time_step(dt);
  // block Jacobi of rho M + dt gamma A, one block per cell and component
  const DGForms& f = *forms_;
  const double tau = dt * tableau_.a[0][0];
  const MatrixXd& m1 = f.mass_1d(f.velocity_degree());
  const int n = f.velocity_degree() + 1;
  MatrixXd mass(n * n, n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj)
        for (int ii = 0; ii < n; ++ii)
          mass(i + n * j, ii + n * jj) = m1(i, ii) * m1(j, jj) * f.mesh().cell_measure();
  std::map<const MatrixXd*, int> index;
  std::vector<MatrixXd> blocks;
  std::vector<int> of_unit;
  for (int c = 0; c < f.mesh().n_cells(); ++c) {
    const MatrixXd* vb = &f.viscous_cell_block(c);
    auto it = index.find(vb);
    if (it == index.end()) {
      it = index.emplace(vb, static_cast<int>(blocks.size())).first;
      blocks.push_back(f.config().rho * mass + tau * *vb);
    }
    of_unit.push_back(it->second);
    of_unit.push_back(it->second);
  }
  stage_precond_.emplace(blocks, of_unit);
  prepared_dt_ = dt;
}

DGField PressureCorrectionStepper::solve_stage(const DGField& rhs, const DGField& guess,
                                               double tau, double t, StepReport* report) const {
  const DGForms& f = *forms_;
  const double rho = f.config().rho;
  DGField v = guess;
  if (config_.model == FlowModel::Stokes) {
    LinearOperator op;
    op.size = v.size();
    op.apply = [&](const VectorXd& in, VectorXd& out) {
      const DGField x = with_coeffs(v, in);
      out = rho * f.apply_mass(x).coeffs + tau * f.apply_a(x).coeffs;
    };
    const SolveReport rep = cg_solve(op, rhs.coeffs, v.coeffs, config_.stokes_tol,
                                     config_.stokes_max_it, stage_precond_->as_function());
    if (report) report->stage_solves.push_back(rep);
    if (!rep.converged) throw std::runtime_error("viscous stage solve failed: " + rep.message);
    return v;
  }
  auto residual = [&](const VectorXd& x, VectorXd& r) {
    const DGField u = with_coeffs(v, x);
    r = rho * f.apply_mass(u).coeffs +
        tau * (f.apply_a(u).coeffs + rho * f.apply_c(u, t).coeffs) - rhs.coeffs;
  };
  NewtonOptions opts = config_.newton;
  opts.abs_tol = std::max(opts.abs_tol, 1e-14 * rhs.coeffs.norm());
  const NewtonReport rep =
      newton_krylov_solve(residual, v.coeffs, opts, stage_precond_->as_function());
  if (report) report->newton_solves.push_back(rep);
  if (!rep.converged)
    throw std::runtime_error("viscous stage Newton solve failed (relative residual " +
                             std::to_string(rep.relative_residual) + ")");
  return v;
}

DGField PressureCorrectionStepper::viscous_substep(const SplittingState& s, double dt,
                                                   StepReport* report) {
  prepare(dt);
  const DGForms& f = *forms_;
  const double rho = f.config().rho;
  const DIRKTableau& tb = tableau_;
  const double tau = dt * tb.a[0][0];
  const VectorXd mv = rho * f.apply_mass(s.v).coeffs;

  // stage i: rho M V_i + tau (A V_i + rho C(V_i)) = S_i + tau (l(t_i) - B^T p*)
  auto explicit_part = [&](double ti) {
    DGField e = f.rhs_l(ti);
    e.coeffs -= f.apply_bt(s.p).coeffs;
    e.coeffs *= tau;
    return e;
  };
  DGField rhs = explicit_part(s.t + tb.c[0] * dt);
  rhs.coeffs += mv;
  const DGField v1 = solve_stage(rhs, s.v, tau, s.t + tb.c[0] * dt, report);
  // R(V_1) recovered from the first stage equation
  const VectorXd r1 = (rho * f.apply_mass(v1).coeffs - mv) / tau;
  rhs = explicit_part(s.t + tb.c[1] * dt);
  rhs.coeffs += mv + dt * tb.a[1][0] * r1;
  return solve_stage(rhs, v1, tau, s.t + tb.c[1] * dt, report);
}

SplittingState PressureCorrectionStepper::step(const SplittingState& s, double dt,
                                               StepReport* report) {
  const DGField tentative = viscous_substep(s, dt, report);
  const double t1 = s.t + dt;
  HelmholtzResult proj = projector_.project(tentative, t1);
  if (report)
    report->projection_solves.insert(report->projection_solves.end(), proj.reports.begin(),
                                     proj.reports.end());
  const DGForms& f = *forms_;
  SplittingState next;
  next.t = t1;
  next.v = std::move(proj.v);
  next.p = s.p;
  next.p.coeffs += (config_.omega * f.config().rho / dt) * proj.psi.coeffs;
  DGField defect = f.apply_b(tentative);
  defect.coeffs -= f.rhs_r(t1).coeffs;
  next.p.coeffs += f.config().mu * f.apply_inverse_mass(defect).coeffs;
  f.remove_mean(next.p);
  return next;
}

DGField initial_pressure(const PressureCorrectionStepper& stepper, const DGField& v, double t) {
  const DGForms& f = stepper.forms();
  const double rho = f.config().rho;
  DGField w = f.apply_inverse_mass(stepper.momentum_residual(v, f.pressure_field(), t));
  w.coeffs /= rho;
  const double h = 1e-6 * std::max(1.0, std::abs(t));
  DGField rhs = f.apply_b(w);
  rhs.coeffs -= (f.rhs_r(t + h).coeffs - f.rhs_r(t - h).coeffs) / (2.0 * h);
  DGField p = stepper.projector().solve_alpha(rhs);
  p.coeffs *= rho;
  return p;
}

int step_count(double t0, double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_count: dt must be positive");
  if (T <= t0) return 0;
  return static_cast<int>(std::ceil((T - t0) / dt - 1e-9));
}

SplittingState run_simulation(PressureCorrectionStepper& stepper, SplittingState state, double T,
                              double dt,
                              const std::function<void(const SplittingState&)>& on_step) {
  const double t0 = state.t;
  const int n = step_count(t0, T, dt);
  for (int k = 0; k < n; ++k) {
    const double h = k + 1 == n ? T - state.t : dt;
    try {
      state = stepper.step(state, h);
    } catch (const std::exception& e) {
      throw std::runtime_error("step " + std::to_string(k + 1) + " at t = " +
                               std::to_string(state.t) + ": " + e.what());
    }
    if (on_step) on_step(state);
  }
  return state;
}

}  // namespace dgflow
