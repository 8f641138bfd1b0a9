#pragma once

#include <Eigen/Dense>

#include "dgflow/dg_field.hpp"
#include "dgflow/forms.hpp"

namespace dgflow {

/// One-dimensional building blocks of RT^k on [0,1]. In the normal direction of a
/// component the basis is dual to the functionals {f(0), f(1), (2j+1) int f L_j, j < k};
/// in the tangential direction it is the shifted Legendre basis L_0..L_k.
class RTBasis1D {
 public:
  explicit RTBasis1D(int k);

  [[nodiscard]] int k() const { return k_; }
  /// Dual basis values (k+2) and derivatives at x.
  [[nodiscard]] Eigen::VectorXd normal_values(double x) const;
  [[nodiscard]] Eigen::VectorXd normal_derivatives(double x) const;
  /// L_0..L_k at x.
  [[nodiscard]] Eigen::VectorXd legendre_values(double x) const;

 private:
  int k_;
  Eigen::MatrixXd dual_;  // column r: Legendre coefficients of dual function r
};

/// Raviart-Thomas field of degree k on a structured mesh.
///
/// Each face stores k+1 Legendre coefficients of the trace of the velocity component
/// along the face normal axis (positive axis orientation), in physical units, so the
/// normal trace is single-valued. Each cell stores 2k(k+1) interior coefficients: for
/// component i, the normalized Legendre coefficients of degree j < k along axis i and
/// b <= k along the other axis, at index i*k(k+1) + j + k*b. On axis-aligned cells the
/// contravariant map is a constant diagonal scaling, which this physical-unit storage
/// absorbs.
struct RTField {
  const StructuredMesh2D* mesh = nullptr;
  int k = 0;
  Eigen::VectorXd face;      // n_faces * (k+1)
  Eigen::VectorXd interior;  // n_cells * 2k(k+1)

  RTField() = default;
  RTField(const StructuredMesh2D& m, int degree);

  [[nodiscard]] int face_dofs() const { return k + 1; }
  [[nodiscard]] int interior_dofs() const { return 2 * k * (k + 1); }

  /// Coefficient matrix of one component on one cell: rows are the normal-direction
  /// dual functions (lower face, upper face, interior moments), columns the tangential
  /// Legendre degrees.
  [[nodiscard]] Eigen::MatrixXd cell_coefficients(int cell, int comp) const;

  [[nodiscard]] Vec2 value(int cell, double xr, double yr) const;
  [[nodiscard]] double divergence(int cell, double xr, double yr) const;

  RTField& operator+=(const RTField& o);
};

/// gamma = G_h psi, the RT^k reconstruction of -grad psi for psi in the pressure space.
/// Requires 0 <= k <= p-1.
RTField reconstruct_pressure_flux(const DGForms& forms, const DGField& psi, int k);

/// Divergence-preserving reconstruction of w in RT^{p-1}, with Dirichlet normal data at t.
RTField reconstruct_velocity(const DGForms& forms, const DGField& w, double t);

/// Exact divergence of an RT^k field as a DG scalar of degree k.
DGField rt_divergence(const RTField& v);

/// Exact representation of an RT^k field in the DG space of degree p >= k+1.
DGField rt_embed_to_dg(const RTField& v, int p);

}  // namespace dgflow
