#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dgflow/forms.hpp"
#include "dgflow/krylov.hpp"

namespace dgflow {

/// The four discrete Helmholtz decompositions of a tentative velocity.
enum class ProjectionKind { DivDiv, DivDivConti, PressurePoissonRT, HelmholtzRT };

ProjectionKind parse_projection_kind(const std::string& name);
std::string to_string(ProjectionKind kind);

struct ProjectionConfig {
  ProjectionKind kind = ProjectionKind::HelmholtzRT;
  /// Time step and kinematic viscosity entering the default penalty constants.
  double dt = 1.0;
  double nu = 0.0;
  /// Uniform overrides of the per-cell and per-face penalty constants.
  std::optional<double> tau_d;
  std::optional<double> tau_c;
  /// RT degree of the pressure-Poisson RT variant; -1 selects p-2.
  int rt_degree = -1;
  double poisson_tol = 1e-12;
  double penalty_tol = 1e-12;
  int max_it = 20000;
};

/// w = v + grad psi in the discrete sense of the selected variant; psi has zero mean.
struct HelmholtzResult {
  DGField v;
  DGField psi;
  std::vector<SolveReport> reports;
};

/// Projection operator bound to a set of DG forms of velocity degree p >= 2. Precomputes
/// the pressure-Poisson preconditioner and the element matrices of the penalized
/// projections.
class Projector {
 public:
  Projector(const DGForms& forms, ProjectionConfig config);

  [[nodiscard]] const ProjectionConfig& config() const { return config_; }
  [[nodiscard]] const DGForms& forms() const { return *forms_; }

  /// Dispatches to the configured variant.
  [[nodiscard]] HelmholtzResult project(const DGField& w, double t) const;

  /// alpha(psi, q) = b(w, q) - r(q; t) for all q, with zero-mean psi. The right-hand
  /// side is projected onto the range of alpha (orthogonal to the ones vector), which
  /// removes any mismatch between the net flux of w and of the Dirichlet data.
  [[nodiscard]] DGField solve_pressure_poisson(const DGField& w, double t,
                                               SolveReport* report = nullptr) const;

  /// alpha(psi, q_i) = rhs_i with zero-mean psi; rhs is projected onto the range first.
  [[nodiscard]] DGField solve_alpha(const DGField& rhs, SolveReport* report = nullptr) const;

  /// Time step entering the default penalty constants.
  void set_time_step(double dt);

  [[nodiscard]] HelmholtzResult project_divdiv(const DGField& w, double t) const;
  [[nodiscard]] HelmholtzResult project_divdivconti(const DGField& w, double t) const;
  [[nodiscard]] HelmholtzResult project_ppoisson_rt(const DGField& w, double t) const;
  [[nodiscard]] HelmholtzResult project_helmholtz_rt(const DGField& w, double t) const;

  /// tau_D per cell: dt * max|w|_E * sqrt(|E|) + dt * nu, unless overridden.
  [[nodiscard]] std::vector<double> divdiv_penalties(const DGField& w) const;
  /// tau_C per face (zero on boundary faces): dt * max|w| over the adjacent cells
  /// + dt * nu / h_e, unless overridden.
  [[nodiscard]] std::vector<double> continuity_penalties(const DGField& w) const;

  /// (v, phi) + sum_E tau_D (div v, div phi)_E + sum_e tau_C ([v].n, [phi].n)_e.
  [[nodiscard]] DGField apply_penalized_mass(const DGField& v, const std::vector<double>& tau_d,
                                             const std::vector<double>& tau_c) const;
  /// (grad_h psi, phi) with the element-wise gradient.
  [[nodiscard]] DGField gradient_load(const DGField& psi) const;

  /// RT degree used by the reconstruction variants.
  [[nodiscard]] int rt_degree() const;

 private:
  [[nodiscard]] DGField penalized_rhs(const DGField& w, const DGField& psi) const;
  [[nodiscard]] Eigen::MatrixXd conti_cell_block(int cell, double tau_d,
                                                 const std::vector<double>& tau_c) const;

  const DGForms* forms_;
  ProjectionConfig config_;
  BlockJacobi alpha_precond_;
  Eigen::MatrixXd cell_mass_, cell_divdiv_;
  Eigen::MatrixXd eig_vectors_;  // K V = M V diag(lambda), V^T M V = I
  Eigen::VectorXd eig_values_;
};

}  // namespace dgflow
