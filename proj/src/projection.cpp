#include "dgflow/projection.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "dgflow/rt_space.hpp"

namespace dgflow {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

BlockJacobi make_alpha_precond(const DGForms& forms) {
  if (forms.velocity_degree() < 2)
    throw std::invalid_argument("Projector: velocity degree must be >= 2");
  std::map<const MatrixXd*, int> index;
  std::vector<MatrixXd> blocks;
  std::vector<int> of_cell;
  for (int c = 0; c < forms.mesh().n_cells(); ++c) {
    const MatrixXd* b = &forms.alpha_cell_block(c);
    auto it = index.find(b);
    if (it == index.end()) {
      it = index.emplace(b, static_cast<int>(blocks.size())).first;
      blocks.push_back(*b);
    }
    of_cell.push_back(it->second);
  }
  return BlockJacobi(blocks, of_cell);
}

LinearOperator field_operator(const DGField& shape, std::function<DGField(const DGField&)> f,
                              bool constant_null_space) {
  LinearOperator op;
  op.size = shape.size();
  op.constant_null_space = constant_null_space;
  op.apply = [shape, f = std::move(f)](const VectorXd& in, VectorXd& out) {
    DGField x = shape.zeros_like();
    x.coeffs = in;
    out = f(x).coeffs;
  };
  return op;
}

/// Largest nodal velocity magnitude on a cell.
double cell_max_speed(const DGField& w, int c) {
  const auto u0 = w.block(c, 0), u1 = w.block(c, 1);
  return std::sqrt((u0.array().square() + u1.array().square()).maxCoeff());
}

/// Local indices of the nodal trace of the normal component on the face (axis, side).
std::vector<int> trace_indices(int p, int axis, int side) {
  const int n = p + 1;
  std::vector<int> idx(n);
  for (int m = 0; m < n; ++m)
    idx[m] = axis == 0 ? side * p + n * m : n * n + m + n * side * p;
  return idx;
}

void check_velocity(const DGForms& forms, const DGField& w, const char* what) {
  if (w.mesh != &forms.mesh() || w.degree != forms.velocity_degree() || w.components != 2)
    throw std::invalid_argument(std::string(what) + ": field is not in the velocity space");
}

}  // namespace

ProjectionKind parse_projection_kind(const std::string& name) {
  if (name == "divdiv") return ProjectionKind::DivDiv;
  if (name == "divdivconti") return ProjectionKind::DivDivConti;
  if (name == "ppoisson_rt") return ProjectionKind::PressurePoissonRT;
  if (name == "helmholtz_rt") return ProjectionKind::HelmholtzRT;
  throw std::invalid_argument("unknown projection variant '" + name + "'");
}

std::string to_string(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::DivDiv: return "divdiv";
    case ProjectionKind::DivDivConti: return "divdivconti";
    case ProjectionKind::PressurePoissonRT: return "ppoisson_rt";
    case ProjectionKind::HelmholtzRT: return "helmholtz_rt";
  }
  return "unknown";
}

Projector::Projector(const DGForms& forms, ProjectionConfig config)
    : forms_(&forms), config_(std::move(config)),
      alpha_precond_(make_alpha_precond(forms)) {
  if (config_.tau_d && *config_.tau_d < 0.0)
    throw std::invalid_argument("Projector: tau_D must be nonnegative");
  if (config_.tau_c && *config_.tau_c < 0.0)
    throw std::invalid_argument("Projector: tau_C must be nonnegative");
  if (!(config_.dt > 0.0) || config_.nu < 0.0)
    throw std::invalid_argument("Projector: dt must be positive and nu nonnegative");
  const int p = forms.velocity_degree();
  const int k = rt_degree();
  if (config_.kind == ProjectionKind::PressurePoissonRT && (k < 0 || k > p - 1))
    throw std::invalid_argument("Projector: RT degree must lie in [0, p-1]");

  // element matrices on the (uniform) reference cell
  const BasisTables& t = forms.velocity_tables();
  const int n = p + 1, nq = t.n_q;
  const double hx = forms.mesh().hx(), hy = forms.mesh().hy();
  MatrixXd val(nq * nq, n * n), dx(nq * nq, n * n), dy(nq * nq, n * n);
  VectorXd w(nq * nq);
  for (int qy = 0; qy < nq; ++qy)
    for (int qx = 0; qx < nq; ++qx) {
      const int q = qx + nq * qy;
      w[q] = t.weights[qx] * t.weights[qy] * hx * hy;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          val(q, i + n * j) = t.val(qx, i) * t.val(qy, j);
          dx(q, i + n * j) = t.der(qx, i) * t.val(qy, j) / hx;
          dy(q, i + n * j) = t.val(qx, i) * t.der(qy, j) / hy;
        }
    }
  MatrixXd div(nq * nq, 2 * n * n);
  div << dx, dy;
  const MatrixXd m1 = val.transpose() * w.asDiagonal() * val;
  cell_mass_ = MatrixXd::Zero(2 * n * n, 2 * n * n);
  cell_mass_.topLeftCorner(n * n, n * n) = m1;
  cell_mass_.bottomRightCorner(n * n, n * n) = m1;
  cell_divdiv_ = div.transpose() * w.asDiagonal() * div;
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(cell_divdiv_, cell_mass_);
  if (ges.info() != Eigen::Success)
    throw std::runtime_error("Projector: generalized eigensolver failed");
  eig_vectors_ = ges.eigenvectors();
  eig_values_ = ges.eigenvalues().cwiseMax(0.0);
}

int Projector::rt_degree() const {
  const int p = forms_->velocity_degree();
  switch (config_.kind) {
    case ProjectionKind::HelmholtzRT: return p - 1;
    case ProjectionKind::PressurePoissonRT: return config_.rt_degree >= 0 ? config_.rt_degree : p - 2;
    default: return -1;
  }
}

HelmholtzResult Projector::project(const DGField& w, double t) const {
  switch (config_.kind) {
    case ProjectionKind::DivDiv: return project_divdiv(w, t);
    case ProjectionKind::DivDivConti: return project_divdivconti(w, t);
    case ProjectionKind::PressurePoissonRT: return project_ppoisson_rt(w, t);
    case ProjectionKind::HelmholtzRT: return project_helmholtz_rt(w, t);
  }
  throw std::logic_error("Projector: unknown variant");
}

DGField Projector::solve_pressure_poisson(const DGField& w, double t, SolveReport* report) const {
  check_velocity(*forms_, w, "solve_pressure_poisson");
  DGField rhs = forms_->apply_b(w);
  rhs.coeffs -= forms_->rhs_r(t).coeffs;
  return solve_alpha(rhs, report);
}

void Projector::set_time_step(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("Projector: dt must be positive");
  config_.dt = dt;
}

DGField Projector::solve_alpha(const DGField& rhs, SolveReport* report) const {
  const DGForms& f = *forms_;
  DGField psi = f.pressure_field();
  const LinearOperator op = field_operator(
      psi, [&f](const DGField& x) { return f.apply_alpha(x); }, true);
  const SolveReport rep =
      cg_solve(op, rhs.coeffs, psi.coeffs, config_.poisson_tol, config_.max_it,
               alpha_precond_.as_function());
  if (!rep.converged)
    throw std::runtime_error("pressure Poisson solve failed: " + rep.message);
  f.remove_mean(psi);
  if (report) *report = rep;
  return psi;
}

DGField Projector::gradient_load(const DGField& psi) const {
  const DGForms& f = *forms_;
  const BasisTables& tv = f.velocity_tables();
  const double hx = f.mesh().hx(), hy = f.mesh().hy();
  MatrixXd w(tv.n_q, tv.n_q);
  for (int qy = 0; qy < tv.n_q; ++qy)
    for (int qx = 0; qx < tv.n_q; ++qx) w(qx, qy) = tv.weights[qx] * tv.weights[qy] * hx * hy;
  DGField out = f.velocity_field();
  CellQuadValues cv;
  MatrixXd gx, gy;
  for (int c = 0; c < f.mesh().n_cells(); ++c) {
    eval_cell(psi.block(c), f.pressure_tables(), hx, hy, cv);
    gx = cv.dx.cwiseProduct(w);
    gy = cv.dy.cwiseProduct(w);
    integrate_cell(tv, hx, hy, &gx, nullptr, nullptr, out.block(c, 0));
    integrate_cell(tv, hx, hy, &gy, nullptr, nullptr, out.block(c, 1));
  }
  return out;
}

std::vector<double> Projector::divdiv_penalties(const DGField& w) const {
  const StructuredMesh2D& m = forms_->mesh();
  std::vector<double> tau(m.n_cells(), config_.tau_d.value_or(0.0));
  if (config_.tau_d) return tau;
  const double h = std::sqrt(m.cell_measure());
  for (int c = 0; c < m.n_cells(); ++c)
    tau[c] = config_.dt * cell_max_speed(w, c) * h + config_.dt * config_.nu;
  return tau;
}

std::vector<double> Projector::continuity_penalties(const DGField& w) const {
  const StructuredMesh2D& m = forms_->mesh();
  std::vector<double> tau(m.n_faces(), 0.0);
  for (int e = 0; e < m.n_faces(); ++e) {
    const Face& f = m.faces()[e];
    if (f.is_boundary()) continue;
    if (config_.tau_c) {
      tau[e] = *config_.tau_c;
      continue;
    }
    const double speed = std::max(cell_max_speed(w, f.left_cell), cell_max_speed(w, f.right_cell));
    tau[e] = config_.dt * speed + config_.dt * config_.nu / m.face_h_e(f);
  }
  return tau;
}

DGField Projector::apply_penalized_mass(const DGField& v, const std::vector<double>& tau_d,
                                        const std::vector<double>& tau_c) const {
  const StructuredMesh2D& m = forms_->mesh();
  const int p = forms_->velocity_degree();
  const Eigen::Index nd = cell_mass_.rows();
  DGField out = v.zeros_like();
  for (int c = 0; c < m.n_cells(); ++c)
    out.coeffs.segment(v.offset(c), nd).noalias() =
        (cell_mass_ + tau_d[c] * cell_divdiv_) * v.coeffs.segment(v.offset(c), nd);
  if (tau_c.empty()) return out;
  const MatrixXd& m1 = forms_->mass_1d(p);
  for (int e = 0; e < m.n_faces(); ++e) {
    const Face& f = m.faces()[e];
    if (f.is_boundary() || tau_c[e] == 0.0) continue;
    const int a = f.axis;
    const double len = f.measure;
    const auto up = trace_indices(p, a, 1), lo = trace_indices(p, a, 0);
    VectorXd jump(p + 1);
    for (int i = 0; i <= p; ++i)
      jump[i] = v.coeffs[v.offset(f.left_cell) + up[i]] - v.coeffs[v.offset(f.right_cell) + lo[i]];
    const VectorXd flux = tau_c[e] * len * (m1 * jump);
    for (int i = 0; i <= p; ++i) {
      out.coeffs[out.offset(f.left_cell) + up[i]] += flux[i];
      out.coeffs[out.offset(f.right_cell) + lo[i]] -= flux[i];
    }
  }
  return out;
}

MatrixXd Projector::conti_cell_block(int cell, double tau_d,
                                     const std::vector<double>& tau_c) const {
  const StructuredMesh2D& m = forms_->mesh();
  const int p = forms_->velocity_degree();
  const MatrixXd& m1 = forms_->mass_1d(p);
  MatrixXd block = cell_mass_ + tau_d * cell_divdiv_;
  auto add = [&](const std::vector<int>& r, const std::vector<int>& s, double scale) {
    for (int i = 0; i <= p; ++i)
      for (int j = 0; j <= p; ++j) block(r[i], s[j]) += scale * m1(i, j);
  };
  for (int lf = 0; lf < 4; ++lf) {
    const int e = m.cell_faces(cell)[lf];
    const Face& f = m.faces()[e];
    if (f.is_boundary() || tau_c[e] == 0.0) continue;
    const int a = lf / 2, side = lf % 2;
    const double s = tau_c[e] * f.measure;
    const auto own = trace_indices(p, a, side);
    add(own, own, s);
    if (f.left_cell == f.right_cell) add(own, trace_indices(p, a, 1 - side), -s);
  }
  return block;
}

DGField Projector::penalized_rhs(const DGField& w, const DGField& psi) const {
  DGField rhs = forms_->apply_mass(w);
  rhs.coeffs -= gradient_load(psi).coeffs;
  return rhs;
}

HelmholtzResult Projector::project_divdiv(const DGField& w, double t) const {
  HelmholtzResult res;
  res.reports.emplace_back();
  res.psi = solve_pressure_poisson(w, t, &res.reports.back());
  const DGField rhs = penalized_rhs(w, res.psi);
  const std::vector<double> tau = divdiv_penalties(w);
  res.v = w.zeros_like();
  const Eigen::Index nd = cell_mass_.rows();
  for (int c = 0; c < forms_->mesh().n_cells(); ++c) {
    if (!(tau[c] >= 0.0)) throw std::invalid_argument("project_divdiv: negative tau_D");
    const VectorXd modal = eig_vectors_.transpose() * rhs.coeffs.segment(rhs.offset(c), nd);
    const VectorXd scaled = modal.cwiseQuotient((1.0 + tau[c] * eig_values_.array()).matrix());
    res.v.coeffs.segment(res.v.offset(c), nd).noalias() = eig_vectors_ * scaled;
  }
  return res;
}

HelmholtzResult Projector::project_divdivconti(const DGField& w, double t) const {
  HelmholtzResult res;
  res.reports.emplace_back();
  res.psi = solve_pressure_poisson(w, t, &res.reports.back());
  const DGField rhs = penalized_rhs(w, res.psi);
  const std::vector<double> tau_d = divdiv_penalties(w), tau_c = continuity_penalties(w);
  std::vector<MatrixXd> blocks;
  std::vector<int> of_cell;
  for (int c = 0; c < forms_->mesh().n_cells(); ++c) {
    if (!(tau_d[c] >= 0.0)) throw std::invalid_argument("project_divdivconti: negative tau_D");
    blocks.push_back(conti_cell_block(c, tau_d[c], tau_c));
    of_cell.push_back(c);
  }
  const BlockJacobi precond(blocks, of_cell);
  const LinearOperator op = field_operator(
      w, [&](const DGField& x) { return apply_penalized_mass(x, tau_d, tau_c); }, false);
  res.v = w;
  res.reports.push_back(cg_solve(op, rhs.coeffs, res.v.coeffs, config_.penalty_tol,
                                 config_.max_it, precond.as_function()));
  if (!res.reports.back().converged)
    throw std::runtime_error("div-div-conti solve failed: " + res.reports.back().message);
  return res;
}

HelmholtzResult Projector::project_ppoisson_rt(const DGField& w, double t) const {
  const int p = forms_->velocity_degree();
  const int k = config_.kind == ProjectionKind::PressurePoissonRT
                    ? rt_degree()
                    : (config_.rt_degree >= 0 ? config_.rt_degree : p - 2);
  if (k < 0) throw std::invalid_argument("project_ppoisson_rt: requires p >= 2");
  HelmholtzResult res;
  res.reports.emplace_back();
  res.psi = solve_pressure_poisson(w, t, &res.reports.back());
  res.v = w;
  res.v.coeffs += rt_embed_to_dg(reconstruct_pressure_flux(*forms_, res.psi, k), p).coeffs;
  return res;
}

HelmholtzResult Projector::project_helmholtz_rt(const DGField& w, double t) const {
  const int p = forms_->velocity_degree();
  HelmholtzResult res;
  res.reports.emplace_back();
  res.psi = solve_pressure_poisson(w, t, &res.reports.back());
  RTField flux = reconstruct_velocity(*forms_, w, t);
  flux += reconstruct_pressure_flux(*forms_, res.psi, p - 1);
  res.v = rt_embed_to_dg(flux, p);
  return res;
}

}  // namespace dgflow
