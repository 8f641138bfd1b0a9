#include "dgflow/rt_space.hpp"

#include <stdexcept>
#include <string>

#include "dgflow/basis.hpp"

namespace dgflow {

using Eigen::MatrixXd;
using Eigen::VectorXd;

RTBasis1D::RTBasis1D(int k) : k_(k) {
  if (k < 0) throw std::invalid_argument("RTBasis1D: negative degree");
  const int n = k + 2;
  MatrixXd lambda = MatrixXd::Zero(n, n);
  for (int m = 0; m < n; ++m) {
    lambda(0, m) = m % 2 == 0 ? 1.0 : -1.0;
    lambda(1, m) = 1.0;
  }
  for (int j = 0; j < k; ++j) lambda(2 + j, j) = 1.0;
  dual_ = lambda.inverse();
}

VectorXd RTBasis1D::normal_values(double x) const {
  VectorXd l(k_ + 2);
  for (int m = 0; m < k_ + 2; ++m) l[m] = shifted_legendre(m, x).first;
  return dual_.transpose() * l;
}

VectorXd RTBasis1D::normal_derivatives(double x) const {
  VectorXd l(k_ + 2);
  for (int m = 0; m < k_ + 2; ++m) l[m] = shifted_legendre(m, x).second;
  return dual_.transpose() * l;
}

VectorXd RTBasis1D::legendre_values(double x) const {
  VectorXd l(k_ + 1);
  for (int m = 0; m <= k_; ++m) l[m] = shifted_legendre(m, x).first;
  return l;
}

RTField::RTField(const StructuredMesh2D& m, int degree)
    : mesh(&m), k(degree), face(VectorXd::Zero(static_cast<Eigen::Index>(m.n_faces()) * (degree + 1))),
      interior(VectorXd::Zero(static_cast<Eigen::Index>(m.n_cells()) * 2 * degree * (degree + 1))) {
  if (degree < 0) throw std::invalid_argument("RTField: negative degree");
}

MatrixXd RTField::cell_coefficients(int cell, int comp) const {
  const int n = k + 1;
  MatrixXd c(k + 2, n);
  const auto& cf = mesh->cell_faces(cell);
  c.row(0) = face.segment(static_cast<Eigen::Index>(cf[local_face(comp, CellSide::Lower)]) * n, n);
  c.row(1) = face.segment(static_cast<Eigen::Index>(cf[local_face(comp, CellSide::Upper)]) * n, n);
  const Eigen::Index base = static_cast<Eigen::Index>(cell) * interior_dofs() + comp * k * n;
  for (int j = 0; j < k; ++j)
    for (int b = 0; b < n; ++b) c(2 + j, b) = interior[base + j + k * b];
  return c;
}

Vec2 RTField::value(int cell, double xr, double yr) const {
  const RTBasis1D rb(k);
  const MatrixXd c0 = cell_coefficients(cell, 0), c1 = cell_coefficients(cell, 1);
  return {rb.normal_values(xr).dot(c0 * rb.legendre_values(yr)),
          rb.normal_values(yr).dot(c1 * rb.legendre_values(xr))};
}

double RTField::divergence(int cell, double xr, double yr) const {
  const RTBasis1D rb(k);
  const MatrixXd c0 = cell_coefficients(cell, 0), c1 = cell_coefficients(cell, 1);
  return rb.normal_derivatives(xr).dot(c0 * rb.legendre_values(yr)) / mesh->hx() +
         rb.normal_derivatives(yr).dot(c1 * rb.legendre_values(xr)) / mesh->hy();
}

RTField& RTField::operator+=(const RTField& o) {
  if (o.mesh != mesh || o.k != k) throw std::invalid_argument("RTField: incompatible spaces");
  face += o.face;
  interior += o.interior;
  return *this;
}

namespace {

/// Legendre values L_0..L_k (columns) at the rule points (rows).
MatrixXd legendre_table(const BasisTables& t, int k) {
  MatrixXd L(t.n_q, k + 1);
  for (int q = 0; q < t.n_q; ++q)
    for (int b = 0; b <= k; ++b) L(q, b) = shifted_legendre(b, t.points[q]).first;
  return L;
}

/// Normalized Legendre coefficients (2b+1) int_0^1 f L_b of face samples f.
VectorXd face_legendre(const BasisTables& t, const MatrixXd& L, const VectorXd& f) {
  VectorXd c(L.cols());
  for (int b = 0; b < L.cols(); ++b) {
    double s = 0.0;
    for (int q = 0; q < t.n_q; ++q) s += f[q] * L(q, b) * t.weights[q];
    c[b] = (2 * b + 1) * s;
  }
  return c;
}

/// Scales reference moment sums int_0^1 int_0^1 f L_j L_b by (2j+1)(2b+1) and stores them
/// as interior coefficients of one component (j < k).
void store_interior(RTField& v, int cell, int comp, const MatrixXd& moments) {
  const int k = v.k;
  const Eigen::Index base = static_cast<Eigen::Index>(cell) * v.interior_dofs() + comp * k * (k + 1);
  for (int j = 0; j < k; ++j)
    for (int b = 0; b <= k; ++b)
      v.interior[base + j + k * b] = (2 * j + 1) * (2 * b + 1) * moments(j, b);
}

MatrixXd weight_matrix(const BasisTables& t) {
  MatrixXd w(t.n_q, t.n_q);
  for (int a = 0; a < t.n_q; ++a)
    for (int b = 0; b < t.n_q; ++b) w(a, b) = t.weights[a] * t.weights[b];
  return w;
}

}  // namespace

RTField reconstruct_pressure_flux(const DGForms& forms, const DGField& psi, int k) {
  const int p = forms.velocity_degree();
  if (k < 0 || k > p - 1)
    throw std::invalid_argument("reconstruct_pressure_flux: degree " + std::to_string(k) +
                                " outside [0, p-1]");
  if (!psi.same_space(forms.pressure_field()))
    throw std::invalid_argument("reconstruct_pressure_flux: psi not in the pressure space");
  const StructuredMesh2D& mesh = forms.mesh();
  const BasisTables& t = forms.pressure_tables();
  const MatrixXd L = legendre_table(t, k);
  const double sigma = forms.sigma_pressure();
  RTField gamma(mesh, k);

  // face moments and the per-face jump samples needed by the interior moments
  std::vector<VectorXd> jumps(mesh.n_faces());
  FaceQuadValues tl, tr;
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces()[fi];
    if (f.is_boundary()) continue;
    const double hn = mesh.h(f.axis);
    eval_face(psi.block(f.left_cell), t, f.axis, 1, hn, tl);
    eval_face(psi.block(f.right_cell), t, f.axis, 0, hn, tr);
    jumps[fi] = tl.value - tr.value;
    const VectorXd flux = -0.5 * (tl.normal_derivative + tr.normal_derivative) +
                          (sigma / mesh.face_h_e(f)) * jumps[fi];
    gamma.face.segment(static_cast<Eigen::Index>(fi) * (k + 1), k + 1) = face_legendre(t, L, flux);
  }
  if (k == 0) return gamma;

  const MatrixXd W = weight_matrix(t);
  CellQuadValues cv;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    eval_cell(psi.block(c), t, mesh.hx(), mesh.hy(), cv);
    const auto& cf = mesh.cell_faces(c);
    for (int comp = 0; comp < 2; ++comp) {
      const MatrixXd& d = comp == 0 ? cv.dx : cv.dy;
      // (qx,qy) -> normal index along comp, tangential along the other axis
      const MatrixXd g = comp == 0 ? MatrixXd(-d.cwiseProduct(W)) : MatrixXd(-d.cwiseProduct(W).transpose());
      MatrixXd moments = L.leftCols(k).transpose() * g * L;  // (j, b)
      for (int side = 0; side < 2; ++side) {
        const int fi = cf[local_face(comp, static_cast<CellSide>(side))];
        const Face& f = mesh.faces()[fi];
        if (f.is_boundary()) continue;
        // r.n_e = L_j(side) L_b(s) with n_e the positive axis; divide by |E| / |e|
        const double scale = 0.5 * f.measure / mesh.cell_measure();
        for (int j = 0; j < k; ++j) {
          const double lj = side == 0 ? (j % 2 == 0 ? 1.0 : -1.0) : 1.0;
          for (int b = 0; b <= k; ++b) {
            double s = 0.0;
            for (int q = 0; q < t.n_q; ++q) s += L(q, b) * jumps[fi][q] * t.weights[q];
            moments(j, b) += scale * lj * s;
          }
        }
      }
      store_interior(gamma, c, comp, moments);
    }
  }
  return gamma;
}

RTField reconstruct_velocity(const DGForms& forms, const DGField& w, double t_eval) {
  const int p = forms.velocity_degree();
  const int k = p - 1;
  if (!w.same_space(forms.velocity_field()))
    throw std::invalid_argument("reconstruct_velocity: w not in the velocity space");
  const StructuredMesh2D& mesh = forms.mesh();
  const BasisTables& t = forms.velocity_tables();
  const MatrixXd L = legendre_table(t, k);
  const auto& g = forms.config().dirichlet;
  RTField v(mesh, k);

  FaceQuadValues tl, tr;
  VectorXd vals(t.n_q);
  for (int fi = 0; fi < mesh.n_faces(); ++fi) {
    const Face& f = mesh.faces()[fi];
    const int a = f.axis;
    const double hn = mesh.h(a);
    if (!f.is_boundary()) {
      eval_face(w.block(f.left_cell, a), t, a, 1, hn, tl, false);
      eval_face(w.block(f.right_cell, a), t, a, 0, hn, tr, false);
      vals = 0.5 * (tl.value + tr.value);
    } else {
      vals.setZero();
      if (g) {
        const auto x0 = mesh.cell_origin(f.left_cell);
        const double side = f.normal_sign > 0 ? 1.0 : 0.0;
        for (int q = 0; q < t.n_q; ++q) {
          const double x = a == 0 ? x0[0] + side * mesh.hx() : x0[0] + t.points[q] * mesh.hx();
          const double y = a == 0 ? x0[1] + t.points[q] * mesh.hy() : x0[1] + side * mesh.hy();
          vals[q] = g(x, y, t_eval)[a];
        }
      }
    }
    v.face.segment(static_cast<Eigen::Index>(fi) * (k + 1), k + 1) = face_legendre(t, L, vals);
  }
  if (k == 0) return v;

  const MatrixXd W = weight_matrix(t);
  MatrixXd cv;
  for (int c = 0; c < mesh.n_cells(); ++c)
    for (int comp = 0; comp < 2; ++comp) {
      eval_cell_values(w.block(c, comp), t, cv);
      const MatrixXd wv = cv.cwiseProduct(W);
      const MatrixXd g2 = comp == 0 ? wv : MatrixXd(wv.transpose());
      store_interior(v, c, comp, L.leftCols(k).transpose() * g2 * L);
    }
  return v;
}

namespace {

/// Tables of the RT 1D functions at the Lagrange nodes of a DG degree.
struct NodeTables {
  MatrixXd normal, normal_der, tangential;
};

NodeTables node_tables(int k, int degree) {
  const RTBasis1D rb(k);
  const TensorBasis1D basis(degree);
  const int n = degree + 1;
  NodeTables nt{MatrixXd(n, k + 2), MatrixXd(n, k + 2), MatrixXd(n, k + 1)};
  for (int i = 0; i < n; ++i) {
    const double x = basis.nodes()[i];
    nt.normal.row(i) = rb.normal_values(x).transpose();
    nt.normal_der.row(i) = rb.normal_derivatives(x).transpose();
    nt.tangential.row(i) = rb.legendre_values(x).transpose();
  }
  return nt;
}

}  // namespace

DGField rt_divergence(const RTField& v) {
  const StructuredMesh2D& mesh = *v.mesh;
  const NodeTables nt = node_tables(v.k, v.k);
  DGField out(mesh, v.k, 1);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const MatrixXd c0 = v.cell_coefficients(c, 0), c1 = v.cell_coefficients(c, 1);
    out.block(c) = nt.normal_der * c0 * nt.tangential.transpose() / mesh.hx() +
                   nt.tangential * c1.transpose() * nt.normal_der.transpose() / mesh.hy();
  }
  return out;
}

DGField rt_embed_to_dg(const RTField& v, int p) {
  if (v.k > p - 1)
    throw std::invalid_argument("rt_embed_to_dg: RT degree " + std::to_string(v.k) +
                                " does not fit into DG degree " + std::to_string(p));
  const StructuredMesh2D& mesh = *v.mesh;
  const NodeTables nt = node_tables(v.k, p);
  DGField out(mesh, p, 2);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    out.block(c, 0) = nt.normal * v.cell_coefficients(c, 0) * nt.tangential.transpose();
    out.block(c, 1) = nt.tangential * v.cell_coefficients(c, 1).transpose() * nt.normal.transpose();
  }
  return out;
}

}  // namespace dgflow
