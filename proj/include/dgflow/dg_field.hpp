#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>

#include "dgflow/mesh.hpp"

namespace dgflow {

using Vec2 = std::array<double, 2>;
using ScalarFunction = std::function<double(double x, double y, double t)>;
using VectorFunction = std::function<Vec2(double x, double y, double t)>;

/// Element-local tensor-product Lagrange coefficients (Gauss-Lobatto nodes) of a scalar
/// or 2-vector field. Storage is cell-major: cell c, component k occupies
/// [(c*components + k) * (p+1)^2, ...), with the x index running fastest.
struct DGField {
  const StructuredMesh2D* mesh = nullptr;
  int degree = 0;
  int components = 1;
  Eigen::VectorXd coeffs;

  DGField() = default;
  DGField(const StructuredMesh2D& m, int p, int n_components)
      : mesh(&m), degree(p), components(n_components),
        coeffs(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.n_cells()) * n_components *
                                     (p + 1) * (p + 1))) {}

  [[nodiscard]] int block_size() const { return (degree + 1) * (degree + 1); }
  [[nodiscard]] int dofs_per_cell() const { return components * block_size(); }
  [[nodiscard]] Eigen::Index size() const { return coeffs.size(); }
  [[nodiscard]] Eigen::Index offset(int cell, int comp = 0) const {
    return (static_cast<Eigen::Index>(cell) * components + comp) * block_size();
  }

  [[nodiscard]] Eigen::Map<Eigen::MatrixXd> block(int cell, int comp = 0) {
    return {coeffs.data() + offset(cell, comp), degree + 1, degree + 1};
  }
  [[nodiscard]] Eigen::Map<const Eigen::MatrixXd> block(int cell, int comp = 0) const {
    return {coeffs.data() + offset(cell, comp), degree + 1, degree + 1};
  }

  [[nodiscard]] DGField zeros_like() const { return DGField(*mesh, degree, components); }
  [[nodiscard]] bool same_space(const DGField& o) const {
    return mesh == o.mesh && degree == o.degree && components == o.components;
  }

  /// Point value in cell `cell` at reference coordinates (xr, yr) in [0,1]^2.
  [[nodiscard]] double value(int cell, int comp, double xr, double yr) const;
  /// Physical gradient of one component at reference coordinates.
  [[nodiscard]] Vec2 gradient(int cell, int comp, double xr, double yr) const;
};

/// Nodal interpolation at the Gauss-Lobatto points.
DGField interpolate(const StructuredMesh2D& mesh, int degree, const VectorFunction& f, double t);
DGField interpolate(const StructuredMesh2D& mesh, int degree, const ScalarFunction& f, double t);

/// L2 projection using an n_quad-point Gauss rule per direction.
DGField l2_project(const StructuredMesh2D& mesh, int degree, const VectorFunction& f, double t,
                   int n_quad);
DGField l2_project(const StructuredMesh2D& mesh, int degree, const ScalarFunction& f, double t,
                   int n_quad);

}  // namespace dgflow
