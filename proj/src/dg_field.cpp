#include "dgflow/dg_field.hpp"

#include "dgflow/basis.hpp"

namespace dgflow {

double DGField::value(int cell, int comp, double xr, double yr) const {
  const TensorBasis1D basis(degree);
  const Eigen::VectorXd bx = basis.values(xr);
  const Eigen::VectorXd by = basis.values(yr);
  return bx.dot(block(cell, comp) * by);
}

Vec2 DGField::gradient(int cell, int comp, double xr, double yr) const {
  const TensorBasis1D basis(degree);
  const auto U = block(cell, comp);
  const Eigen::VectorXd bx = basis.values(xr), by = basis.values(yr);
  const Eigen::VectorXd dx = basis.derivatives(xr), dy = basis.derivatives(yr);
  return {dx.dot(U * by) / mesh->hx(), bx.dot(U * dy) / mesh->hy()};
}

namespace {

template <class Eval>
DGField interpolate_impl(const StructuredMesh2D& mesh, int degree, int comps, Eval&& eval) {
  DGField u(mesh, degree, comps);
  const TensorBasis1D basis(degree);
  const auto& nodes = basis.nodes();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto x0 = mesh.cell_origin(c);
    for (int j = 0; j <= degree; ++j)
      for (int i = 0; i <= degree; ++i) {
        const double x = x0[0] + nodes[i] * mesh.hx();
        const double y = x0[1] + nodes[j] * mesh.hy();
        for (int k = 0; k < comps; ++k) u.block(c, k)(i, j) = eval(x, y, k);
      }
  }
  return u;
}

template <class Eval>
DGField project_impl(const StructuredMesh2D& mesh, int degree, int comps, int n_quad,
                     Eval&& eval) {
  DGField u(mesh, degree, comps);
  const TensorBasis1D basis(degree);
  const BasisTables t(basis, unit_gauss(n_quad));
  const Eigen::MatrixXd m1 = t.val.transpose() *
                             Eigen::VectorXd::Map(t.weights.data(), t.n_q).asDiagonal() * t.val;
  // the cell Jacobian cancels between the mass matrix and the load vector
  const Eigen::MatrixXd m1inv = m1.inverse();
  Eigen::MatrixXd f(t.n_q, t.n_q);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto x0 = mesh.cell_origin(c);
    for (int k = 0; k < comps; ++k) {
      for (int qy = 0; qy < t.n_q; ++qy)
        for (int qx = 0; qx < t.n_q; ++qx) {
          const double x = x0[0] + t.points[qx] * mesh.hx();
          const double y = x0[1] + t.points[qy] * mesh.hy();
          f(qx, qy) = eval(x, y, k) * t.weights[qx] * t.weights[qy];
        }
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
      integrate_cell(t, 1.0, 1.0, &f, nullptr, nullptr, rhs);
      u.block(c, k) = m1inv * rhs * m1inv;
    }
  }
  return u;
}

}  // namespace

DGField interpolate(const StructuredMesh2D& mesh, int degree, const VectorFunction& f, double t) {
  return interpolate_impl(mesh, degree, 2,
                          [&](double x, double y, int k) { return f(x, y, t)[k]; });
}

DGField interpolate(const StructuredMesh2D& mesh, int degree, const ScalarFunction& f, double t) {
  return interpolate_impl(mesh, degree, 1, [&](double x, double y, int) { return f(x, y, t); });
}

DGField l2_project(const StructuredMesh2D& mesh, int degree, const VectorFunction& f, double t,
                   int n_quad) {
  return project_impl(mesh, degree, 2, n_quad,
                      [&](double x, double y, int k) { return f(x, y, t)[k]; });
}

DGField l2_project(const StructuredMesh2D& mesh, int degree, const ScalarFunction& f, double t,
                   int n_quad) {
  return project_impl(mesh, degree, 1, n_quad,
                      [&](double x, double y, int) { return f(x, y, t); });
}

}  // namespace dgflow
