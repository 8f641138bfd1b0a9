#include <gtest/gtest.h>

#include <cmath>

#include "dgflow/ripcs.hpp"

using namespace dgflow;

namespace {

const ProjectionKind kAllKinds[] = {ProjectionKind::DivDiv, ProjectionKind::DivDivConti,
                                    ProjectionKind::PressurePoissonRT,
                                    ProjectionKind::HelmholtzRT};

SplittingConfig splitting(ProjectionKind kind, FlowModel model) {
  SplittingConfig c;
  c.model = model;
  c.projection.kind = kind;
  c.projection.poisson_tol = 1e-13;
  return c;
}

// harmonic cubic potential: v = t grad(chi) and p = -chi solve the unsteady Stokes problem
double chi(double x, double y) { return x * x * x - 3 * x * y * y; }
Vec2 grad_chi(double x, double y) { return {3 * x * x - 3 * y * y, -6 * x * y}; }

// stationary solution: v = (x^2, -2xy), p = x + y
Vec2 stationary_v(double x, double y, double) { return {x * x, -2 * x * y}; }

double max_divergence(const DGField& v) {
  const auto rule = unit_gauss(v.degree + 2);
  double worst = 0.0;
  for (int c = 0; c < v.mesh->n_cells(); ++c)
    for (double x : rule.points)
      for (double y : rule.points)
        worst = std::max(worst, std::abs(v.gradient(c, 0, x, y)[0] + v.gradient(c, 1, x, y)[1]));
  return worst;
}

}  // namespace

TEST(DIRK, OrderConditionsAndStiffAccuracy) {
  const auto tb = DIRKTableau::alexander();
  const double g = 1.0 - std::sqrt(2.0) / 2.0;
  EXPECT_DOUBLE_EQ(tb.a[0][0], g);
  EXPECT_EQ(tb.a[0][1], 0.0);
  EXPECT_NEAR(tb.b[0] + tb.b[1], 1.0, 1e-14);
  EXPECT_NEAR(tb.b[0] * tb.c[0] + tb.b[1] * tb.c[1], 0.5, 1e-14);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(tb.a[i][0] + tb.a[i][1], tb.c[i], 1e-14);
  EXPECT_EQ(tb.a[1][0], tb.b[0]);
  EXPECT_EQ(tb.a[1][1], tb.b[1]);
}

TEST(StepCount, TruncatesLastStep) {
  EXPECT_EQ(step_count(0.0, 1.0, 0.3), 4);
  EXPECT_EQ(step_count(0.0, 1.0, 0.005), 200);
  EXPECT_EQ(step_count(0.5, 0.5, 0.1), 0);
  EXPECT_THROW(step_count(0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(RunSimulation, StepSizesAndZeroSteps) {
  const StructuredMesh2D m(2, 2, {}, {true, true});
  const DGForms forms(m, 2, FormConfig{});
  PressureCorrectionStepper stepper(forms, splitting(ProjectionKind::DivDiv, FlowModel::Stokes));
  SplittingState s{forms.velocity_field(), forms.pressure_field(), 0.0};
  std::vector<double> times;
  const auto end = run_simulation(stepper, s, 1.0, 0.3,
                                  [&](const SplittingState& st) { times.push_back(st.t); });
  ASSERT_EQ(times.size(), 4u);
  EXPECT_NEAR(times[2], 0.9, 1e-14);
  EXPECT_DOUBLE_EQ(end.t, 1.0);
  int calls = 0;
  const auto same = run_simulation(stepper, s, 0.0, 0.1, [&](const SplittingState&) { ++calls; });
  EXPECT_EQ(calls, 0);
  EXPECT_EQ(same.t, 0.0);
}

TEST(RunSimulation, ZeroProblemStaysZero) {
  const StructuredMesh2D m(3, 3, {}, {false, false});
  const DGForms forms(m, 2, FormConfig{});
  for (auto kind : kAllKinds)
    for (auto model : {FlowModel::Stokes, FlowModel::NavierStokes}) {
      PressureCorrectionStepper stepper(forms, splitting(kind, model));
      SplittingState s{forms.velocity_field(), forms.pressure_field(), 0.0};
      s = run_simulation(stepper, s, 0.1, 0.01);
      EXPECT_EQ(s.v.coeffs.norm(), 0.0);
      EXPECT_EQ(s.p.coeffs.norm(), 0.0);
    }
}

TEST(Stepper, LinearInTimeStokesSolutionIsReproduced) {
  const StructuredMesh2D m(3, 3, {}, {false, false});
  FormConfig fc;
  fc.mu = 0.1;
  fc.dirichlet = [](double x, double y, double t) {
    const auto g = grad_chi(x, y);
    return Vec2{t * g[0], t * g[1]};
  };
  const DGForms forms(m, 4, fc);
  auto exact_v = [&](double t) { return interpolate(m, 4, fc.dirichlet, t); };
  DGField p_exact = interpolate(m, 3, [](double x, double y, double) { return -chi(x, y); }, 0.0);
  forms.remove_mean(p_exact);
  for (auto kind : kAllKinds) {
    PressureCorrectionStepper stepper(forms, splitting(kind, FlowModel::Stokes));
    SplittingState s{exact_v(0.2), p_exact, 0.2};
    StepReport rep;
    for (int k = 0; k < 3; ++k) {
      const DGField tentative = stepper.viscous_substep(s, 0.05, &rep);
      DGField diff = tentative;
      diff.coeffs -= exact_v(s.t + 0.05).coeffs;
      EXPECT_LE(forms.l2_norm(diff), 1e-9) << to_string(kind);
      s = stepper.step(s, 0.05);
    }
    DGField dv = s.v, dp = s.p;
    dv.coeffs -= exact_v(s.t).coeffs;
    dp.coeffs -= p_exact.coeffs;
    EXPECT_LE(forms.l2_norm(dv), 1e-9) << to_string(kind);
    EXPECT_LE(forms.l2_norm(dp), 1e-8) << to_string(kind);
    for (const auto& r : rep.stage_solves) EXPECT_TRUE(r.converged);
  }
}

TEST(Stepper, InitialPressureOfPotentialFlow) {
  const StructuredMesh2D m(3, 2, {}, {false, false});
  FormConfig fc;
  fc.mu = 0.01;
  fc.dirichlet = [](double x, double y, double t) {
    const auto g = grad_chi(x, y);
    return Vec2{t * g[0], t * g[1]};
  };
  const DGForms forms(m, 4, fc);
  PressureCorrectionStepper stepper(forms,
                                    splitting(ProjectionKind::HelmholtzRT, FlowModel::Stokes));
  const DGField v0 = interpolate(m, 4, fc.dirichlet, 0.5);
  DGField p_exact = interpolate(m, 3, [](double x, double y, double) { return -chi(x, y); }, 0.0);
  forms.remove_mean(p_exact);
  DGField diff = initial_pressure(stepper, v0, 0.5);
  diff.coeffs -= p_exact.coeffs;
  EXPECT_LE(forms.l2_norm(diff), 1e-7 * forms.l2_norm(p_exact));
}

class StationaryReproduction
    : public ::testing::TestWithParam<std::tuple<ProjectionKind, FlowModel>> {};

TEST_P(StationaryReproduction, FiftyStepsLeaveStateUnchanged) {
  const auto [kind, model] = GetParam();
  const StructuredMesh2D m(4, 4, {}, {false, false});
  FormConfig fc;
  fc.mu = 0.05;
  fc.dirichlet = stationary_v;
  const bool nse = model == FlowModel::NavierStokes;
  fc.body_force = [mu = fc.mu, nse](double x, double y, double) {
    // -mu lap v + grad p (+ (v.grad) v)
    Vec2 f{-2.0 * mu + 1.0, 1.0};
    if (nse) {
      f[0] += 2 * x * x * x;
      f[1] += 2 * x * x * y;
    }
    return f;
  };
  const DGForms forms(m, 2, fc);
  PressureCorrectionStepper stepper(forms, splitting(kind, model));
  SplittingState s{interpolate(m, 2, stationary_v, 0.0),
                   interpolate(m, 1, [](double x, double y, double) { return x + y; }, 0.0), 0.0};
  forms.remove_mean(s.p);
  const DGField v0 = s.v;
  s = run_simulation(stepper, s, 0.5, 0.01, [&](const SplittingState& st) {
    EXPECT_NEAR(forms.integrate(st.p), 0.0, 1e-12);
  });
  DGField diff = s.v;
  diff.coeffs -= v0.coeffs;
  EXPECT_LE(forms.l2_norm(diff), 1e-7);
}

INSTANTIATE_TEST_SUITE_P(
    Variants, StationaryReproduction,
    ::testing::Combine(::testing::ValuesIn(kAllKinds),
                       ::testing::Values(FlowModel::Stokes, FlowModel::NavierStokes)),
    [](const auto& info) {
      return to_string(std::get<0>(info.param)) +
             (std::get<1>(info.param) == FlowModel::Stokes ? "_stokes" : "_navier_stokes");
    });

TEST(Stepper, HelmholtzVariantKeepsVelocityDivergenceFree) {
  const StructuredMesh2D m(4, 4, {}, {true, true});
  FormConfig fc;
  fc.mu = 1e-3;
  const DGForms forms(m, 3, fc);
  PressureCorrectionStepper stepper(
      forms, splitting(ProjectionKind::HelmholtzRT, FlowModel::NavierStokes));
  const double pi = std::acos(-1.0);
  const VectorFunction vortex = [pi](double x, double y, double) {
    return Vec2{std::sin(2 * pi * x) * std::cos(2 * pi * y) + 0.3,
                -std::cos(2 * pi * x) * std::sin(2 * pi * y) + 0.1 * std::sin(2 * pi * x)};
  };
  SplittingState s{interpolate(m, 3, vortex, 0.0), forms.pressure_field(), 0.0};
  s.p = initial_pressure(stepper, s.v, 0.0);
  run_simulation(stepper, s, 0.05, 0.01, [&](const SplittingState& st) {
    EXPECT_LE(max_divergence(st.v), 1e-9 * forms.l2_norm(st.v));
    EXPECT_NEAR(forms.integrate(st.p), 0.0, 1e-12);
  });
}
