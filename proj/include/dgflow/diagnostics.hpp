#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "dgflow/dg_field.hpp"
#include "dgflow/forms.hpp"

namespace dgflow {

/// Velocity gradient (d v0/dx, d v0/dy, d v1/dx, d v1/dy).
using TensorFunction = std::function<std::array<double, 4>(double x, double y, double t)>;

struct ExactSolution {
  VectorFunction velocity;
  TensorFunction velocity_gradient;
  ScalarFunction pressure;
};

/// All integrals below use a (p+2)-point Gauss rule per direction and cell.

/// 1/2 (v, v).
double kinetic_energy(const DGField& v);
/// 1/2 (curl_h v, curl_h v) with the scalar curl d v1/dx - d v0/dy.
double enstrophy(const DGField& v);
/// nu / |Omega| (grad_h v, grad_h v).
double dissipation(const DGField& v, double nu);
/// Largest |div v| over the quadrature points of all cells.
double max_pointwise_divergence(const DGField& v);
/// Largest per-cell residual of the face-flux balance, see DGForms::local_mass_residual.
double max_local_mass_residual(const DGForms& forms, const DGField& v, double t);

struct ErrorNorms {
  double velocity_l2 = 0.0;
  double velocity_h1 = 0.0;  // broken H1 seminorm
  double pressure_l2 = 0.0;  // after removing the mean of p_h - p
};

ErrorNorms error_norms(const DGField& v, const DGField& p, const ExactSolution& exact, double t);

struct BenchmarkRecord {
  double t = 0.0;
  double e_kin = 0.0;
  double enstrophy = 0.0;
  double dissipation = 0.0;
  double max_div = 0.0;
  double max_mass_residual = 0.0;
  std::optional<double> err_v_l2;
  std::optional<double> err_v_h1;
  std::optional<double> err_p_l2;
};

BenchmarkRecord make_record(const DGForms& forms, const DGField& v, const DGField& p, double t,
                            double nu, const ExactSolution* exact = nullptr);

/// sqrt of the trapezoidal rule applied to e(t)^2; needs at least two samples.
double cumulative_norm(const std::vector<double>& t, const std::vector<double>& e);
/// Same for one error column of a record sequence sorted by t; missing values are errors.
double cumulative_norm(const std::vector<BenchmarkRecord>& records,
                       std::optional<double> BenchmarkRecord::*field);

}  // namespace dgflow
