#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "dgflow/basis.hpp"
#include "dgflow/dg_field.hpp"
#include "dgflow/mesh.hpp"

namespace dgflow {

/// Interior penalty factor for the velocity space, alpha * p * (p + d - 1).
double velocity_penalty(int p, int d, double alpha);
/// Interior penalty factor for the pressure space of degree p-1, alpha * (p-1) * (p + d - 2).
double pressure_penalty(int p, int d, double alpha);

/// Jump int - ext and average (int + ext)/2 of face traces.
std::pair<Eigen::VectorXd, Eigen::VectorXd> jump_and_average(const Eigen::VectorXd& interior,
                                                             const Eigen::VectorXd& exterior);

/// Physical and discretization parameters of the DG forms. The interior penalty
/// variant is symmetric (SIPG); there is no switch for the non-symmetric ones.
struct FormConfig {
  double mu = 1.0;
  double rho = 1.0;
  double penalty_alpha = 3.0;
  VectorFunction body_force;  // f(x,y,t); empty means zero
  VectorFunction dirichlet;   // g(x,y,t); empty means zero
};

/// Matrix-free DG forms for velocity degree p and pressure degree p-1 on a structured
/// mesh. All "apply" functions return the vector of form values against every test basis
/// function (the algebraic residual), not a Riesz representative.
class DGForms {
 public:
  DGForms(const StructuredMesh2D& mesh, int velocity_degree, FormConfig config);

  [[nodiscard]] const StructuredMesh2D& mesh() const { return *mesh_; }
  [[nodiscard]] const FormConfig& config() const { return config_; }
  [[nodiscard]] int velocity_degree() const { return p_; }
  [[nodiscard]] int pressure_degree() const { return p_ - 1; }
  [[nodiscard]] double sigma_velocity() const { return sigma_v_; }
  [[nodiscard]] double sigma_pressure() const { return sigma_p_; }
  [[nodiscard]] const BasisTables& velocity_tables() const { return tv_; }
  [[nodiscard]] const BasisTables& pressure_tables() const { return tp_; }
  [[nodiscard]] const BasisTables& convection_tables() const { return tc_; }

  [[nodiscard]] DGField velocity_field() const { return DGField(*mesh_, p_, 2); }
  [[nodiscard]] DGField pressure_field() const { return DGField(*mesh_, p_ - 1, 1); }

  /// a(u, phi_i): viscous SIPG form with Dirichlet face terms.
  [[nodiscard]] DGField apply_a(const DGField& u) const;
  /// b(v, q_i) for all pressure tests.
  [[nodiscard]] DGField apply_b(const DGField& v) const;
  /// b(phi_i, q) for all velocity tests.
  [[nodiscard]] DGField apply_bt(const DGField& q) const;
  /// c(v, phi_i) with upwind fluxes; Dirichlet data enters the boundary flux at time t.
  [[nodiscard]] DGField apply_c(const DGField& v, double t) const;
  /// alpha(psi, q_i): SIPG Laplacian on the pressure space, homogeneous Neumann.
  [[nodiscard]] DGField apply_alpha(const DGField& psi) const;
  /// l(phi_i; t) including the Dirichlet lifting and penalty terms.
  [[nodiscard]] DGField rhs_l(double t) const;
  /// r(q_i; t) = sum over Dirichlet faces of (g . n, q_i).
  [[nodiscard]] DGField rhs_r(double t) const;

  /// Scalar form values.
  [[nodiscard]] double b(const DGField& v, const DGField& q) const;
  [[nodiscard]] double a(const DGField& u, const DGField& v) const;
  [[nodiscard]] double alpha(const DGField& psi, const DGField& q) const;

  [[nodiscard]] DGField apply_mass(const DGField& u) const;
  [[nodiscard]] DGField apply_inverse_mass(const DGField& rhs) const;

  /// B_h w: (B_h w, q) = -b(w, q) + r(q; t) for all q in the pressure space.
  [[nodiscard]] DGField discrete_divergence(const DGField& w, double t) const;

  /// Per cell: sum over interior faces of ({v}.n_E, 1) plus Dirichlet faces (g.n, 1).
  [[nodiscard]] std::vector<double> local_mass_residual(const DGField& v, double t) const;

  /// Diagonal (cell) block of the scalar SIPG operators, for block preconditioning.
  /// The vector viscous block is block-diagonal in the components with this block.
  [[nodiscard]] const Eigen::MatrixXd& viscous_cell_block(int cell) const;
  [[nodiscard]] const Eigen::MatrixXd& alpha_cell_block(int cell) const;
  /// 1D mass matrix of degree k on [0,1]; the cell mass block is hx*hy*(M1 kron M1).
  [[nodiscard]] const Eigen::MatrixXd& mass_1d(int degree) const;

  /// Integral over the domain of a scalar DG field.
  [[nodiscard]] double integrate(const DGField& scalar) const;
  /// Subtracts the L2 mean of a scalar field.
  void remove_mean(DGField& scalar) const;
  [[nodiscard]] double l2_norm(const DGField& u) const;
  [[nodiscard]] double l2_inner(const DGField& u, const DGField& v) const;

 private:
  int boundary_mask(int cell) const;

  const StructuredMesh2D* mesh_;
  int p_;
  FormConfig config_;
  double sigma_v_, sigma_p_;
  BasisTables tv_, tp_, tc_;
  Eigen::MatrixXd mass1_v_, mass1_p_, mass1_v_inv_, mass1_p_inv_;
  std::map<int, Eigen::MatrixXd> viscous_blocks_, alpha_blocks_;  // keyed by boundary mask
};

}  // namespace dgflow
