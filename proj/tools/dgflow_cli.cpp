// Command-line driver: single runs, convergence studies, viscosity sweeps and projection checks.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dgflow/bench.hpp"

using namespace dgflow;

namespace {

struct Overrides {
  std::string config;
  std::string problem;
  std::string variant;
  int degree = 0;
  int cells = 0;
  double dt = 0.0;
  double final_time = 0.0;
  std::string out;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "configuration file")->check(CLI::ExistingFile);
  app->add_option("--problem", o.problem, "problem name");
  app->add_option("--variant", o.variant, "divdiv | divdivconti | ppoisson_rt | helmholtz_rt");
  app->add_option("-p,--degree", o.degree, "velocity degree")->check(CLI::Range(2, 12));
  app->add_option("-n,--cells", o.cells, "cells per direction")->check(CLI::PositiveNumber);
  app->add_option("--dt", o.dt, "time step")->check(CLI::PositiveNumber);
  app->add_option("-T,--final-time", o.final_time, "final time");
  app->add_option("-o,--out", o.out, "output file (default: config path or stdout)");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : parse_config(o.config);
  if (!o.problem.empty()) c.problem = o.problem;
  if (!o.variant.empty()) c.variant = parse_projection_kind(o.variant);
  if (o.degree) c.degree = o.degree;
  if (o.cells) c.nx = c.ny = o.cells;
  if (o.dt > 0) c.dt = o.dt;
  if (o.final_time > 0) c.final_time = o.final_time;
  if (!o.out.empty()) c.output = o.out;
  validate(c);
  return c;
}

/// Writes via `write` to the configured path, or to stdout when none is set.
template <typename W>
void write_output(const std::string& path, W&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

/// "2..4" or "2,3,4".
std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> levels;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots)), hi = std::stoi(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty level range '" + text + "'");
    for (int l = lo; l <= hi; ++l) levels.push_back(l);
  } else {
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) levels.push_back(std::stoi(item));
  }
  return levels;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order DG incompressible flow solver with pressure-correction splitting"};
  app.require_subcommand(1);

  Overrides run_o, conv_o, rob_o;
  auto* run = app.add_subcommand("run", "run one configuration and write the per-step CSV");
  add_overrides(run, run_o);

  auto* conv = app.add_subcommand("convergence", "spatial or temporal convergence study");
  add_overrides(conv, conv_o);
  std::string levels = "2..4";
  std::vector<double> dts;
  conv->add_option("--levels", levels, "levels l (2^(l+2) cells per direction), e.g. 2..4");
  conv->add_option("--dts", dts, "time steps for a temporal study (comma separated)")
      ->delimiter(',');

  auto* rob = app.add_subcommand("robustness", "cumulative errors over a viscosity sweep");
  add_overrides(rob, rob_o);
  std::vector<double> nus{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  rob->add_option("--nu", nus, "viscosities (comma separated)")->delimiter(',');

  auto* proj = app.add_subcommand("project-test", "structure checks of a projection on random input");
  std::string proj_variant = "helmholtz_rt";
  int proj_degree = 2, proj_cells = 8, proj_samples = 100;
  unsigned proj_seed = 1;
  bool proj_periodic = false;
  proj->add_option("--variant", proj_variant, "projection variant");
  proj->add_option("-p,--degree", proj_degree, "velocity degree")->check(CLI::Range(2, 12));
  proj->add_option("-n,--cells", proj_cells, "cells per direction")->check(CLI::PositiveNumber);
  proj->add_option("--samples", proj_samples, "random inputs")->check(CLI::PositiveNumber);
  proj->add_option("--seed", proj_seed, "random seed");
  proj->add_flag("--periodic", proj_periodic, "periodic instead of Dirichlet boundaries");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const RunConfig c = resolve(run_o);
      Simulation sim(make_problem(c.problem, c.nu), c);
      std::vector<BenchmarkRecord> records;
      try {
        sim.run(records, c.every);
      } catch (const std::exception&) {
        write_output(c.output, [&](std::ostream& o) { write_csv(o, records); });
        throw;
      }
      write_output(c.output, [&](std::ostream& o) { write_csv(o, records); });
    } else if (*conv) {
      const RunConfig c = resolve(conv_o);
      const auto rows = dts.empty() ? spatial_convergence(c, parse_levels(levels))
                                    : temporal_convergence(c, dts);
      write_output(c.output, [&](std::ostream& o) { write_convergence_table(o, rows); });
    } else if (*rob) {
      const RunConfig c = resolve(rob_o);
      const auto rows = robustness_sweep(c, nus);
      write_output(c.output, [&](std::ostream& o) { write_robustness_table(o, rows); });
    } else if (*proj) {
      const ProjectionCheck r =
          check_projection(parse_projection_kind(proj_variant), proj_degree, proj_cells,
                           proj_samples, proj_seed, proj_periodic);
      std::cout << "variant,degree,cells,samples,max_div,max_continuity,max_mass_residual,"
                   "max_idempotence\n"
                << proj_variant << ',' << proj_degree << ',' << proj_cells << ','
                << proj_samples << ',' << r.max_divergence << ',' << r.max_continuity << ','
                << r.max_mass_residual << ',' << r.max_idempotence << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
