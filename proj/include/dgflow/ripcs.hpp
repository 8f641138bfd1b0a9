#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dgflow/forms.hpp"
#include "dgflow/krylov.hpp"
#include "dgflow/projection.hpp"

namespace dgflow {

/// Two-stage, stiffly accurate, L-stable DIRK scheme of order two.
struct DIRKTableau {
  double a[2][2];
  double b[2];
  double c[2];

  /// gamma = 1 - sqrt(2)/2, A = [[gamma, 0], [1 - gamma, gamma]], b = (1 - gamma, gamma),
  /// c = (gamma, 1).
  static DIRKTableau alexander();
};

enum class FlowModel { Stokes, NavierStokes };

struct SplittingConfig {
  FlowModel model = FlowModel::NavierStokes;
  /// Weight of the pressure increment in the pressure update.
  double omega = 1.5;
  /// Projection variant and solver settings; dt and nu are set by the stepper.
  ProjectionConfig projection;
  /// Relative tolerance of the linear (Stokes) stage solves.
  double stokes_tol = 1e-12;
  int stokes_max_it = 5000;
  /// Stage solver for the convective case; abs_tol is raised to 1e-14 * ||stage rhs||.
  NewtonOptions newton{1e-10, 0.0, 1e-4, 20, 500, 60, false};
};

/// Velocity of degree p and zero-mean pressure of degree p-1 at time t.
struct SplittingState {
  DGField v;
  DGField p;
  double t = 0.0;
};

struct StepReport {
  std::vector<SolveReport> stage_solves;
  std::vector<NewtonReport> newton_solves;
  std::vector<SolveReport> projection_solves;
};

/// Rotational incremental pressure-correction scheme: a DIRK viscous substep with the
/// lagged pressure, a Helmholtz projection at the new time, and the pressure update
///   p^{k+1} = p^k + omega * rho * psi / dt - mu * B_h(v~), followed by mean removal.
class PressureCorrectionStepper {
 public:
  PressureCorrectionStepper(const DGForms& forms, SplittingConfig config);

  [[nodiscard]] const DGForms& forms() const { return *forms_; }
  [[nodiscard]] const SplittingConfig& config() const { return config_; }
  [[nodiscard]] const Projector& projector() const { return projector_; }

  /// R(v, p; t) = l(t) - a(v) - rho c(v; t) - b(., p) as form values (c omitted for Stokes).
  [[nodiscard]] DGField momentum_residual(const DGField& v, const DGField& p, double t) const;

  /// Tentative velocity at state.t + dt with the pressure frozen at state.p.
  [[nodiscard]] DGField viscous_substep(const SplittingState& state, double dt,
                                        StepReport* report = nullptr);

  /// One full step of size dt.
  [[nodiscard]] SplittingState step(const SplittingState& state, double dt,
                                    StepReport* report = nullptr);

 private:
  void prepare(double dt);
  [[nodiscard]] DGField solve_stage(const DGField& rhs, const DGField& guess, double tau,
                                    double t, StepReport* report) const;

  const DGForms* forms_;
  SplittingConfig config_;
  DIRKTableau tableau_;
  Projector projector_;
  double prepared_dt_ = -1.0;
  std::optional<BlockJacobi> stage_precond_;
};

/// Pressure consistent with an initial velocity: p/rho solves
///   alpha(p/rho, q) = b(w, q) - dr/dt(q; t),  w = M^{-1} R(v, 0; t) / rho.
DGField initial_pressure(const PressureCorrectionStepper& stepper, const DGField& v, double t);

/// Number of steps from t0 to T with nominal step dt; the last step is truncated.
int step_count(double t0, double T, double dt);

/// Advances to T, calling on_step after every step. Returns the final state.
SplittingState run_simulation(PressureCorrectionStepper& stepper, SplittingState state, double T,
                              double dt,
                              const std::function<void(const SplittingState&)>& on_step = {});

}  // namespace dgflow
