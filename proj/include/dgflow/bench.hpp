#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgflow/diagnostics.hpp"
#include "dgflow/mesh.hpp"
#include "dgflow/projection.hpp"
#include "dgflow/ripcs.hpp"

namespace dgflow {

/// Analytic benchmark: geometry, physics, data and (optionally) the exact solution.
struct ProblemSpec {
  std::string name;
  DomainBounds domain;
  std::array<bool, 2> periodic{false, false};
  double nu = 1.0;
  double rho = 1.0;
  FlowModel model = FlowModel::NavierStokes;
  VectorFunction initial_velocity;
  ScalarFunction initial_pressure;  // empty: computed from the initial velocity
  std::optional<ExactSolution> exact;
  VectorFunction dirichlet;   // empty on fully periodic domains
  VectorFunction body_force;  // empty means zero
  double t0 = 0.0;
  double T = 1.0;
  double default_dt = 1e-2;
};

/// Harmonic potential chi = 5x^4 y + y^5 - 10x^2 y^3 and its gradient.
double potential_chi(double x, double y);
Vec2 potential_grad_chi(double x, double y);

/// Unsteady Stokes flow v = t grad(chi), p = -chi on (0,1)^2 with Dirichlet data. The
/// forced variant adds f = grad(psi), psi = exp(-10(1 - x + 2y)), and p = -chi + psi.
ProblemSpec problem_potential_flow(bool forced, double nu = 0.1);

/// Gresho vortex centred at (0.5, 0.5) on the periodic unit square, nu = 1e-5; the moving
/// variant adds the uniform wind (1/3, 1/3). No exact solution.
ProblemSpec problem_gresho(bool moving);

/// Decaying 2D Taylor-Green vortex on (-1,1)^2, nu = 1/100, Dirichlet from the exact trace.
ProblemSpec problem_taylor_green_2d();

/// Steady Stokes flow v = (x^2, -2xy), p = x + y on the unit square.
ProblemSpec problem_stationary(double nu = 0.05);

/// Registry lookup; nu overrides the problem viscosity when given.
ProblemSpec make_problem(const std::string& name, std::optional<double> nu = std::nullopt);
const std::vector<std::string>& problem_names();

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything a single run needs. Optional fields fall back to problem or projector defaults.
struct RunConfig {
  // [problem]
  std::string problem = "taylor_green";
  std::optional<double> nu;
  std::optional<double> final_time;
  // [discretization]
  int degree = 2;
  int nx = 16;
  int ny = 16;
  std::optional<double> dt;
  // [projection]
  ProjectionKind variant = ProjectionKind::HelmholtzRT;
  std::optional<int> rt_degree;
  std::optional<double> tau_d;
  std::optional<double> tau_c;
  double omega = 1.5;
  // [solver]
  double poisson_tol = 1e-12;
  double penalty_tol = 1e-12;
  double stokes_tol = 1e-12;
  double newton_tol = 1e-10;
  int max_iterations = 20000;
  // [output]
  std::string output;  // empty: standard output
  int every = 1;       // record every n-th step (the final step is always recorded)

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the offending key.
void validate(const RunConfig& config);

/// INI-style text: sections [problem], [discretization], [projection], [solver], [output]
/// with key = value lines. Unknown sections or keys are errors.
RunConfig parse_config_text(const std::string& text, const std::string& source = "<string>");
RunConfig parse_config(const std::string& path);
/// Writes every set field, so parse_config_text(format_config(c)) == c.
std::string format_config(const RunConfig& config);

/// Projector settings for a run; the RT degree defaults to p-2 (pressure Poisson) or p-1
/// (Helmholtz flux).
ProjectionConfig projection_config(const RunConfig& config);
/// RT degree used by the RT variants; empty for the penalized projections.
std::optional<int> effective_rt_degree(const RunConfig& config);
SplittingConfig splitting_config(const RunConfig& config, FlowModel model);

inline constexpr const char* kCsvHeader =
    "t,e_kin,enstrophy,dissipation,max_div,max_mass_residual,err_v_l2,err_v_h1,err_p_l2";

void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records);
/// Writes the CSV file; I/O failures are reported with the path.
void emit_csv(const std::vector<BenchmarkRecord>& records, const std::string& path);

/// Mesh, forms and stepper of one run, with the initial state.
class Simulation {
 public:
  Simulation(ProblemSpec problem, const RunConfig& config);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  [[nodiscard]] const ProblemSpec& problem() const { return problem_; }
  [[nodiscard]] const StructuredMesh2D& mesh() const { return mesh_; }
  [[nodiscard]] const DGForms& forms() const { return forms_; }
  [[nodiscard]] PressureCorrectionStepper& stepper() { return stepper_; }
  [[nodiscard]] const SplittingState& initial_state() const { return initial_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] double final_time() const { return T_; }

  [[nodiscard]] BenchmarkRecord record(const SplittingState& s) const;

  /// Runs to the final time, appending a record at t0 and after every `every`-th step
  /// (and the last). Records collected before a failure stay in `records`.
  SplittingState run(std::vector<BenchmarkRecord>& records, int every = 1);

 private:
  ProblemSpec problem_;
  StructuredMesh2D mesh_;
  DGForms forms_;
  PressureCorrectionStepper stepper_;
  SplittingState initial_;
  double dt_, T_;
};

/// Records of a full run of config.problem.
std::vector<BenchmarkRecord> run_config(const RunConfig& config);

struct CumulativeErrors {
  double velocity_l2 = 0.0;
  double velocity_h1 = 0.0;
  double pressure_l2 = 0.0;
};

/// L2-in-time norms of the error columns (trapezoidal rule).
CumulativeErrors cumulative_errors(const std::vector<BenchmarkRecord>& records);

/// log2(coarse / fine); NaN when either error is not positive.
double observed_rate(double coarse, double fine, double ratio = 2.0);

struct ConvergenceRow {
  int cells = 0;  // cells per direction (spatial study) or number of steps (temporal study)
  double h = 0.0;  // mesh size or time step
  CumulativeErrors errors;
  std::optional<CumulativeErrors> rates;  // against the previous row
};

/// Spatial study on 2^(l+2) cells per direction for each level; errors are cumulative.
std::vector<ConvergenceRow> spatial_convergence(const RunConfig& base,
                                                const std::vector<int>& levels);
/// Temporal study over the given step sizes; errors are taken at the final time.
std::vector<ConvergenceRow> temporal_convergence(const RunConfig& base,
                                                 const std::vector<double>& dts);
void write_convergence_table(std::ostream& out, const std::vector<ConvergenceRow>& rows);

struct RobustnessRow {
  double nu = 0.0;
  CumulativeErrors errors;
};

/// One run of the base configuration per viscosity.
std::vector<RobustnessRow> robustness_sweep(const RunConfig& base, const std::vector<double>& nus);
void write_robustness_table(std::ostream& out, const std::vector<RobustnessRow>& rows);

/// Structure checks of one projection variant on random tentative velocities.
struct ProjectionCheck {
  double max_divergence = 0.0;      // max |div v| at quadrature points / ||w||
  double max_continuity = 0.0;      // max |b(v, q_i) - r(q_i)| / ||w||
  double max_mass_residual = 0.0;   // max per-cell mass residual / ||w||
  double max_idempotence = 0.0;     // ||P(Pw) - Pw|| / ||w||
};

ProjectionCheck check_projection(ProjectionKind kind, int degree, int cells, int samples,
                                 unsigned seed, bool periodic = false);

}  // namespace dgflow
