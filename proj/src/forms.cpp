#include "dgflow/forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dgflow {

double velocity_penalty(int p, int d, double alpha) { return alpha * p * (p + d - 1); }

double pressure_penalty(int p, int d, double alpha) { return alpha * (p - 1) * (p + d - 2); }

std::pair<Eigen::VectorXd, Eigen::VectorXd> jump_and_average(const Eigen::VectorXd& interior,
                                                             const Eigen::VectorXd& exterior) {
  return {interior - exterior, 0.5 * (interior + exterior)};
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kUpper = 1;
constexpr int kLower = 0;

Eigen::Map<const MatrixXd> cblock(const double* data, Eigen::Index off, int n) {
  return {data + off, n, n};
}
Eigen::Map<MatrixXd> mblock(double* data, Eigen::Index off, int n) { return {data + off, n, n}; }

MatrixXd cell_weights(const BasisTables& t, double jac) {
  MatrixXd w(t.n_q, t.n_q);
  for (int qy = 0; qy < t.n_q; ++qy)
    for (int qx = 0; qx < t.n_q; ++qx) w(qx, qy) = t.weights[qx] * t.weights[qy] * jac;
  return w;
}

VectorXd face_weights(const BasisTables& t, double measure) {
  VectorXd w(t.n_q);
  for (int q = 0; q < t.n_q; ++q) w[q] = t.weights[q] * measure;
  return w;
}

/// Physical coordinates of face quadrature points.
Vec2 face_point(const StructuredMesh2D& mesh, const Face& f, int cell, int side,
                double tangential) {
  const auto x0 = mesh.cell_origin(cell);
  if (f.axis == 0) return {x0[0] + side * mesh.hx(), x0[1] + tangential * mesh.hy()};
  return {x0[0] + tangential * mesh.hx(), x0[1] + side * mesh.hy()};
}

/// Scalar SIPG operator
///   (scale grad u, grad v) - ({scale du/dn}, [v]) - ({scale dv/dn}, [u]) + scale sigma/h_e ([u],[v])
/// on interior faces, and the same terms with one-sided traces on Dirichlet faces when
/// `dirichlet` is set. Applies to component `comp` of fields with `comps` components.
/// With only_cell >= 0 only that cell's volume term and faces are visited.
void sipg_apply(const StructuredMesh2D& mesh, const BasisTables& t, double sigma, double scale,
                bool dirichlet, int comps, int comp, const double* in, double* out,
                int only_cell = -1) {
  const int n = t.degree + 1;
  const Eigen::Index bs = static_cast<Eigen::Index>(n) * n;
  auto off = [&](int c) { return (static_cast<Eigen::Index>(c) * comps + comp) * bs; };
  const double hx = mesh.hx(), hy = mesh.hy();
  const MatrixXd w = cell_weights(t, hx * hy);

  CellQuadValues cv;
  MatrixXd fx, fy;
  auto volume = [&](int c) {
    eval_cell(cblock(in, off(c), n), t, hx, hy, cv);
    fx = scale * cv.dx.cwiseProduct(w);
    fy = scale * cv.dy.cwiseProduct(w);
    integrate_cell(t, hx, hy, nullptr, &fx, &fy, mblock(out, off(c), n));
  };

  FaceQuadValues fl, fr;
  VectorXd fv, gv;
  const VectorXd wf[2] = {face_weights(t, hy), face_weights(t, hx)};
  auto face = [&](const Face& f) {
    const int a = f.axis;
    const double hn = mesh.h(a);
    const double pen = sigma / mesh.face_h_e(f);
    if (!f.is_boundary()) {
      eval_face(cblock(in, off(f.left_cell), n), t, a, kUpper, hn, fl);
      eval_face(cblock(in, off(f.right_cell), n), t, a, kLower, hn, fr);
      const VectorXd jump = fl.value - fr.value;
      fv = (scale * (pen * jump - 0.5 * (fl.normal_derivative + fr.normal_derivative)))
               .cwiseProduct(wf[a]);
      gv = (-0.5 * scale * jump).cwiseProduct(wf[a]);
      integrate_face(t, a, kUpper, hn, &fv, &gv, mblock(out, off(f.left_cell), n));
      fv = -fv;
      integrate_face(t, a, kLower, hn, &fv, &gv, mblock(out, off(f.right_cell), n));
    } else if (dirichlet) {
      const int s = static_cast<int>(f.left_side());
      const double sg = f.normal_sign;
      eval_face(cblock(in, off(f.left_cell), n), t, a, s, hn, fl);
      fv = (scale * (pen * fl.value - sg * fl.normal_derivative)).cwiseProduct(wf[a]);
      gv = (-sg * scale * fl.value).cwiseProduct(wf[a]);
      integrate_face(t, a, s, hn, &fv, &gv, mblock(out, off(f.left_cell), n));
    }
  };

  if (only_cell >= 0) {
    volume(only_cell);
    for (int lf : mesh.cell_faces(only_cell)) face(mesh.faces()[lf]);
    return;
  }
  for (int c = 0; c < mesh.n_cells(); ++c) volume(c);
  for (const Face& f : mesh.faces()) face(f);
}

MatrixXd probe_cell_block(const StructuredMesh2D& mesh, const BasisTables& t, double sigma,
                          double scale, bool dirichlet, int cell) {
  const int n = t.degree + 1;
  const int bs = n * n;
  const Eigen::Index total = static_cast<Eigen::Index>(mesh.n_cells()) * bs;
  VectorXd in = VectorXd::Zero(total), out(total);
  MatrixXd block(bs, bs);
  for (int k = 0; k < bs; ++k) {
    in.setZero();
    out.setZero();
    in[static_cast<Eigen::Index>(cell) * bs + k] = 1.0;
    sipg_apply(mesh, t, sigma, scale, dirichlet, 1, 0, in.data(), out.data(), cell);
    block.col(k) = out.segment(static_cast<Eigen::Index>(cell) * bs, bs);
  }
  return block;
}

MatrixXd mass_matrix_1d(const BasisTables& t) {
  return t.val.transpose() * VectorXd::Map(t.weights.data(), t.n_q).asDiagonal() * t.val;
}

void check_space(const DGField& u, const StructuredMesh2D& mesh, int degree, int comps,
                 const char* what) {
  if (u.mesh != &mesh || u.degree != degree || u.components != comps)
    throw std::invalid_argument(std::string(what) + ": field does not match the discrete space");
}

}  // namespace

DGForms::DGForms(const StructuredMesh2D& mesh, int velocity_degree, FormConfig config)
    : mesh_(&mesh), p_(velocity_degree), config_(std::move(config)) {
  if (p_ < 1) throw std::invalid_argument("DGForms: velocity degree must be >= 1");
  if (!(config_.mu > 0.0) || !(config_.rho > 0.0))
    throw std::invalid_argument("DGForms: viscosity and density must be positive");
  sigma_v_ = velocity_penalty(p_, 2, config_.penalty_alpha);
  sigma_p_ = pressure_penalty(p_, 2, config_.penalty_alpha);
  const auto rule = unit_gauss(p_ + 1);
  tv_ = BasisTables(TensorBasis1D(p_), rule);
  tp_ = BasisTables(TensorBasis1D(p_ - 1), rule);
  tc_ = BasisTables(TensorBasis1D(p_), unit_gauss(p_ + 2));
  mass1_v_ = mass_matrix_1d(tv_);
  mass1_p_ = mass_matrix_1d(tp_);
  mass1_v_inv_ = mass1_v_.inverse();
  mass1_p_inv_ = mass1_p_.inverse();

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const int m = boundary_mask(c);
    if (!viscous_blocks_.count(m)) {
      viscous_blocks_[m] = probe_cell_block(mesh, tv_, sigma_v_, config_.mu, true, c);
      alpha_blocks_[m] = probe_cell_block(mesh, tp_, sigma_p_, 1.0, false, c);
    }
  }
}

int DGForms::boundary_mask(int cell) const {
  int mask = 0;
  const auto& cf = mesh_->cell_faces(cell);
  for (int k = 0; k < 4; ++k)
    if (mesh_->faces()[cf[k]].is_boundary()) mask |= 1 << k;
  return mask;
}

const Eigen::MatrixXd& DGForms::viscous_cell_block(int cell) const {
  return viscous_blocks_.at(boundary_mask(cell));
}

const Eigen::MatrixXd& DGForms::alpha_cell_block(int cell) const {
  return alpha_blocks_.at(boundary_mask(cell));
}

const Eigen::MatrixXd& DGForms::mass_1d(int degree) const {
  if (degree == p_) return mass1_v_;
  if (degree == p_ - 1) return mass1_p_;
  throw std::invalid_argument("mass_1d: unsupported degree");
}

DGField DGForms::apply_a(const DGField& u) const {
  check_space(u, *mesh_, p_, 2, "apply_a");
  DGField out = u.zeros_like();
  for (int k = 0; k < 2; ++k)
    sipg_apply(*mesh_, tv_, sigma_v_, config_.mu, true, 2, k, u.coeffs.data(),
               out.coeffs.data());
  return out;
}

DGField DGForms::apply_alpha(const DGField& psi) const {
  check_space(psi, *mesh_, p_ - 1, 1, "apply_alpha");
  DGField out = psi.zeros_like();
  sipg_apply(*mesh_, tp_, sigma_p_, 1.0, false, 1, 0, psi.coeffs.data(), out.coeffs.data());
  return out;
}

DGField DGForms::apply_b(const DGField& v) const {
  check_space(v, *mesh_, p_, 2, "apply_b");
  DGField out = pressure_field();
  const double hx = mesh_->hx(), hy = mesh_->hy();
  const MatrixXd w = cell_weights(tv_, hx * hy);
  CellQuadValues c0, c1;
  MatrixXd f;
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    eval_cell(v.block(c, 0), tv_, hx, hy, c0);
    eval_cell(v.block(c, 1), tv_, hx, hy, c1);
    f = -(c0.dx + c1.dy).cwiseProduct(w);
    integrate_cell(tp_, hx, hy, &f, nullptr, nullptr, out.block(c));
  }
  FaceQuadValues tl, tr;
  VectorXd fv;
  const VectorXd wf[2] = {face_weights(tv_, hy), face_weights(tv_, hx)};
  for (const Face& fc : mesh_->faces()) {
    const int a = fc.axis;
    const double hn = mesh_->h(a);
    if (!fc.is_boundary()) {
      eval_face(v.block(fc.left_cell, a), tv_, a, kUpper, hn, tl, false);
      eval_face(v.block(fc.right_cell, a), tv_, a, kLower, hn, tr, false);
      fv = (0.5 * (tl.value - tr.value)).cwiseProduct(wf[a]);
      integrate_face(tp_, a, kUpper, hn, &fv, nullptr, out.block(fc.left_cell));
      integrate_face(tp_, a, kLower, hn, &fv, nullptr, out.block(fc.right_cell));
    } else {
      const int s = static_cast<int>(fc.left_side());
      eval_face(v.block(fc.left_cell, a), tv_, a, s, hn, tl, false);
      fv = (fc.normal_sign * tl.value).cwiseProduct(wf[a]);
      integrate_face(tp_, a, s, hn, &fv, nullptr, out.block(fc.left_cell));
    }
  }
  return out;
}

DGField DGForms::apply_bt(const DGField& q) const {
  check_space(q, *mesh_, p_ - 1, 1, "apply_bt");
  DGField out = velocity_field();
  const double hx = mesh_->hx(), hy = mesh_->hy();
  const MatrixXd w = cell_weights(tv_, hx * hy);
  MatrixXd qv, f;
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    eval_cell_values(q.block(c), tp_, qv);
    f = -qv.cwiseProduct(w);
    integrate_cell(tv_, hx, hy, nullptr, &f, nullptr, out.block(c, 0));
    integrate_cell(tv_, hx, hy, nullptr, nullptr, &f, out.block(c, 1));
  }
  FaceQuadValues tl, tr;
  VectorXd fv;
  const VectorXd wf[2] = {face_weights(tv_, hy), face_weights(tv_, hx)};
  for (const Face& fc : mesh_->faces()) {
    const int a = fc.axis;
    const double hn = mesh_->h(a);
    if (!fc.is_boundary()) {
      eval_face(q.block(fc.left_cell), tp_, a, kUpper, hn, tl, false);
      eval_face(q.block(fc.right_cell), tp_, a, kLower, hn, tr, false);
      fv = (0.5 * (tl.value + tr.value)).cwiseProduct(wf[a]);
      integrate_face(tv_, a, kUpper, hn, &fv, nullptr, out.block(fc.left_cell, a));
      fv = -fv;
      integrate_face(tv_, a, kLower, hn, &fv, nullptr, out.block(fc.right_cell, a));
    } else {
      const int s = static_cast<int>(fc.left_side());
      eval_face(q.block(fc.left_cell), tp_, a, s, hn, tl, false);
      fv = (fc.normal_sign * tl.value).cwiseProduct(wf[a]);
      integrate_face(tv_, a, s, hn, &fv, nullptr, out.block(fc.left_cell, a));
    }
  }
  return out;
}

DGField DGForms::apply_c(const DGField& v, double t) const {
  check_space(v, *mesh_, p_, 2, "apply_c");
  DGField out = velocity_field();
  const double hx = mesh_->hx(), hy = mesh_->hy();
  const MatrixXd w = cell_weights(tc_, hx * hy);
  MatrixXd v0, v1, fx, fy;
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    eval_cell_values(v.block(c, 0), tc_, v0);
    eval_cell_values(v.block(c, 1), tc_, v1);
    const MatrixXd f01 = -v0.cwiseProduct(v1).cwiseProduct(w);
    fx = -v0.cwiseProduct(v0).cwiseProduct(w);
    integrate_cell(tc_, hx, hy, nullptr, &fx, &f01, out.block(c, 0));
    fy = -v1.cwiseProduct(v1).cwiseProduct(w);
    integrate_cell(tc_, hx, hy, nullptr, &f01, &fy, out.block(c, 1));
  }
  FaceQuadValues l[2], r[2];
  VectorXd fv;
  const VectorXd wf[2] = {face_weights(tc_, hy), face_weights(tc_, hx)};
  for (const Face& fc : mesh_->faces()) {
    const int a = fc.axis;
    const double hn = mesh_->h(a);
    const int nq = tc_.n_q;
    if (!fc.is_boundary()) {
      for (int k = 0; k < 2; ++k) {
        eval_face(v.block(fc.left_cell, k), tc_, a, kUpper, hn, l[k], false);
        eval_face(v.block(fc.right_cell, k), tc_, a, kLower, hn, r[k], false);
      }
      for (int k = 0; k < 2; ++k) {
        fv.resize(nq);
        for (int q = 0; q < nq; ++q) {
          const double vn = 0.5 * (l[a].value[q] + r[a].value[q]);
          fv[q] = (std::max(0.0, vn) * l[k].value[q] + std::min(0.0, vn) * r[k].value[q]) *
                  wf[a][q];
        }
        integrate_face(tc_, a, kUpper, hn, &fv, nullptr, out.block(fc.left_cell, k));
        fv = -fv;
        integrate_face(tc_, a, kLower, hn, &fv, nullptr, out.block(fc.right_cell, k));
      }
    } else {
      const int s = static_cast<int>(fc.left_side());
      for (int k = 0; k < 2; ++k)
        eval_face(v.block(fc.left_cell, k), tc_, a, s, hn, l[k], false);
      std::vector<Vec2> g(nq, Vec2{0.0, 0.0});
      if (config_.dirichlet)
        for (int q = 0; q < nq; ++q) {
          const auto x = face_point(*mesh_, fc, fc.left_cell, s, tc_.points[q]);
          g[q] = config_.dirichlet(x[0], x[1], t);
        }
      for (int k = 0; k < 2; ++k) {
        fv.resize(nq);
        for (int q = 0; q < nq; ++q) {
          const double vn = fc.normal_sign * l[a].value[q];
          fv[q] = (std::max(0.0, vn) * l[k].value[q] + std::min(0.0, vn) * g[q][k]) * wf[a][q];
        }
        integrate_face(tc_, a, s, hn, &fv, nullptr, out.block(fc.left_cell, k));
      }
    }
  }
  return out;
}

DGField DGForms::rhs_l(double t) const {
  DGField out = velocity_field();
  const double hx = mesh_->hx(), hy = mesh_->hy();
  if (config_.body_force) {
    const MatrixXd w = cell_weights(tv_, hx * hy);
    MatrixXd f0(tv_.n_q, tv_.n_q), f1(tv_.n_q, tv_.n_q);
    for (int c = 0; c < mesh_->n_cells(); ++c) {
      const auto x0 = mesh_->cell_origin(c);
      for (int qy = 0; qy < tv_.n_q; ++qy)
        for (int qx = 0; qx < tv_.n_q; ++qx) {
          const auto f = config_.body_force(x0[0] + tv_.points[qx] * hx,
                                            x0[1] + tv_.points[qy] * hy, t);
          f0(qx, qy) = f[0] * w(qx, qy);
          f1(qx, qy) = f[1] * w(qx, qy);
        }
      integrate_cell(tv_, hx, hy, &f0, nullptr, nullptr, out.block(c, 0));
      integrate_cell(tv_, hx, hy, &f1, nullptr, nullptr, out.block(c, 1));
    }
  }
  if (config_.dirichlet) {
    const double mu = config_.mu;
    VectorXd fv(tv_.n_q), gv(tv_.n_q);
    for (const Face& fc : mesh_->faces()) {
      if (!fc.is_boundary()) continue;
      const int a = fc.axis;
      const int s = static_cast<int>(fc.left_side());
      const double hn = mesh_->h(a);
      const double pen = sigma_v_ / mesh_->face_h_e(fc);
      for (int k = 0; k < 2; ++k) {
        for (int q = 0; q < tv_.n_q; ++q) {
          const auto x = face_point(*mesh_, fc, fc.left_cell, s, tv_.points[q]);
          const double gk = config_.dirichlet(x[0], x[1], t)[k];
          const double wq = tv_.weights[q] * fc.measure;
          fv[q] = mu * pen * gk * wq;
          gv[q] = -mu * fc.normal_sign * gk * wq;
        }
        integrate_face(tv_, a, s, hn, &fv, &gv, out.block(fc.left_cell, k));
      }
    }
  }
  return out;
}

DGField DGForms::rhs_r(double t) const {
  DGField out = pressure_field();
  if (!config_.dirichlet) return out;
  VectorXd fv(tv_.n_q);
  for (const Face& fc : mesh_->faces()) {
    if (!fc.is_boundary()) continue;
    const int a = fc.axis;
    const int s = static_cast<int>(fc.left_side());
    for (int q = 0; q < tv_.n_q; ++q) {
      const auto x = face_point(*mesh_, fc, fc.left_cell, s, tv_.points[q]);
      fv[q] = fc.normal_sign * config_.dirichlet(x[0], x[1], t)[a] * tv_.weights[q] * fc.measure;
    }
    integrate_face(tp_, a, s, mesh_->h(a), &fv, nullptr, out.block(fc.left_cell));
  }
  return out;
}

double DGForms::b(const DGField& v, const DGField& q) const {
  return apply_b(v).coeffs.dot(q.coeffs);
}

double DGForms::a(const DGField& u, const DGField& v) const {
  return apply_a(u).coeffs.dot(v.coeffs);
}

double DGForms::alpha(const DGField& psi, const DGField& q) const {
  return apply_alpha(psi).coeffs.dot(q.coeffs);
}

DGField DGForms::apply_mass(const DGField& u) const {
  const MatrixXd& m = mass_1d(u.degree);
  const double jac = mesh_->hx() * mesh_->hy();
  DGField out = u.zeros_like();
  for (int c = 0; c < mesh_->n_cells(); ++c)
    for (int k = 0; k < u.components; ++k)
      out.block(c, k).noalias() = jac * (m * u.block(c, k) * m);
  return out;
}

DGField DGForms::apply_inverse_mass(const DGField& rhs) const {
  const MatrixXd& m = rhs.degree == p_ ? mass1_v_inv_ : mass1_p_inv_;
  if (rhs.degree != p_ && rhs.degree != p_ - 1)
    throw std::invalid_argument("apply_inverse_mass: unsupported degree");
  const double jac = mesh_->hx() * mesh_->hy();
  DGField out = rhs.zeros_like();
  for (int c = 0; c < mesh_->n_cells(); ++c)
    for (int k = 0; k < rhs.components; ++k)
      out.block(c, k).noalias() = (m * rhs.block(c, k) * m) / jac;
  return out;
}

DGField DGForms::discrete_divergence(const DGField& w, double t) const {
  DGField rhs = rhs_r(t);
  rhs.coeffs -= apply_b(w).coeffs;
  return apply_inverse_mass(rhs);
}

std::vector<double> DGForms::local_mass_residual(const DGField& v, double t) const {
  check_space(v, *mesh_, p_, 2, "local_mass_residual");
  std::vector<double> res(mesh_->n_cells(), 0.0);
  FaceQuadValues tl, tr;
  for (const Face& fc : mesh_->faces()) {
    const int a = fc.axis;
    const double hn = mesh_->h(a);
    if (!fc.is_boundary()) {
      eval_face(v.block(fc.left_cell, a), tv_, a, kUpper, hn, tl, false);
      eval_face(v.block(fc.right_cell, a), tv_, a, kLower, hn, tr, false);
      double flux = 0.0;
      for (int q = 0; q < tv_.n_q; ++q)
        flux += 0.5 * (tl.value[q] + tr.value[q]) * tv_.weights[q] * fc.measure;
      res[fc.left_cell] += flux;
      res[fc.right_cell] -= flux;
    } else if (config_.dirichlet) {
      const int s = static_cast<int>(fc.left_side());
      double flux = 0.0;
      for (int q = 0; q < tv_.n_q; ++q) {
        const auto x = face_point(*mesh_, fc, fc.left_cell, s, tv_.points[q]);
        flux += fc.normal_sign * config_.dirichlet(x[0], x[1], t)[a] * tv_.weights[q] *
                fc.measure;
      }
      res[fc.left_cell] += flux;
    }
  }
  return res;
}

double DGForms::integrate(const DGField& u) const {
  const BasisTables& t = u.degree == p_ ? tv_ : tp_;
  const MatrixXd w = cell_weights(t, mesh_->hx() * mesh_->hy());
  MatrixXd vals;
  double sum = 0.0;
  for (int c = 0; c < mesh_->n_cells(); ++c) {
    eval_cell_values(u.block(c), t, vals);
    sum += vals.cwiseProduct(w).sum();
  }
  return sum;
}

void DGForms::remove_mean(DGField& u) const {
  // constants are represented exactly by all-equal nodal coefficients
  u.coeffs.array() -= integrate(u) / mesh_->domain_measure();
}

double DGForms::l2_inner(const DGField& u, const DGField& v) const {
  return apply_mass(u).coeffs.dot(v.coeffs);
}

double DGForms::l2_norm(const DGField& u) const { return std::sqrt(l2_inner(u, u)); }

}  // namespace dgflow
