#include "dgflow/bench.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "dgflow/basis.hpp"

namespace dgflow {

namespace {

const double kPi = std::acos(-1.0);

double psi_forcing(double x, double y) { return std::exp(-10.0 * (1.0 - x + 2.0 * y)); }

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

// ---------------------------------------------------------------------------------------
// problems

double potential_chi(double x, double y) {
  return 5 * std::pow(x, 4) * y + std::pow(y, 5) - 10 * x * x * std::pow(y, 3);
}

Vec2 potential_grad_chi(double x, double y) {
  return {20 * x * x * x * y - 20 * x * y * y * y,
          5 * std::pow(x, 4) + 5 * std::pow(y, 4) - 30 * x * x * y * y};
}

ProblemSpec problem_potential_flow(bool forced, double nu) {
  ProblemSpec s;
  s.name = forced ? "potential_flow_forced" : "potential_flow";
  s.periodic = {false, false};
  s.nu = nu;
  s.model = FlowModel::Stokes;
  ExactSolution ex;
  ex.velocity = [](double x, double y, double t) {
    const Vec2 g = potential_grad_chi(x, y);
    return Vec2{t * g[0], t * g[1]};
  };
  ex.velocity_gradient = [](double x, double y, double t) {
    const double xx = 60 * x * x * y - 20 * y * y * y;
    const double xy = 20 * x * x * x - 60 * x * y * y;
    return std::array<double, 4>{t * xx, t * xy, t * xy, -t * xx};
  };
  ex.pressure = [forced](double x, double y, double) {
    return -potential_chi(x, y) + (forced ? psi_forcing(x, y) : 0.0);
  };
  s.initial_velocity = ex.velocity;
  s.initial_pressure = ex.pressure;
  s.dirichlet = ex.velocity;
  if (forced)
    s.body_force = [](double x, double y, double) {
      const double e = psi_forcing(x, y);
      return Vec2{10.0 * e, -20.0 * e};
    };
  s.exact = ex;
  s.T = 1.0;
  s.default_dt = 5e-3;
  return s;
}

ProblemSpec problem_gresho(bool moving) {
  ProblemSpec s;
  s.name = moving ? "gresho_moving" : "gresho";
  s.periodic = {true, true};
  s.nu = 1e-5;
  s.model = FlowModel::NavierStokes;
  const double w0 = moving ? 1.0 / 3.0 : 0.0;
  s.initial_velocity = [w0](double x, double y, double) {
    const double x1 = x - 0.5, x2 = y - 0.5;
    const double r = std::hypot(x1, x2);
    Vec2 v{w0, w0};
    if (r < 0.2) {
      v[0] += -5 * x2;
      v[1] += 5 * x1;
    } else if (r < 0.4) {
      v[0] += -2 * x2 / r + 5 * x2;
      v[1] += 2 * x1 / r - 5 * x1;
    }
    return v;
  };
  s.initial_pressure = [](double x, double y, double) {
    const double r = std::hypot(x - 0.5, y - 0.5);
    if (r < 0.2) return 5 + 12.5 * r * r;
    if (r < 0.4) return 9 - 4 * std::log(0.2) + 12.5 * r * r - 20 * r + 4 * std::log(r);
    return 3 + 4 * std::log(2.0);
  };
  s.T = 3.0;
  s.default_dt = 2e-3;
  return s;
}

ProblemSpec problem_taylor_green_2d() {
  ProblemSpec s;
  s.name = "taylor_green";
  s.domain = {-1.0, 1.0, -1.0, 1.0};
  s.periodic = {false, false};
  s.nu = 0.01;
  s.model = FlowModel::NavierStokes;
  const double nu = s.nu;
  ExactSolution ex;
  ex.velocity = [nu](double x, double y, double t) {
    const double e = std::exp(-2 * kPi * kPi * nu * t);
    return Vec2{-std::cos(kPi * x) * std::sin(kPi * y) * e,
                std::sin(kPi * x) * std::cos(kPi * y) * e};
  };
  ex.velocity_gradient = [nu](double x, double y, double t) {
    const double e = kPi * std::exp(-2 * kPi * kPi * nu * t);
    const double ss = std::sin(kPi * x) * std::sin(kPi * y) * e;
    const double cc = std::cos(kPi * x) * std::cos(kPi * y) * e;
    return std::array<double, 4>{ss, -cc, cc, -ss};
  };
  ex.pressure = [nu](double x, double y, double t) {
    return -0.25 * (std::cos(2 * kPi * x) + std::cos(2 * kPi * y)) *
           std::exp(-4 * kPi * kPi * nu * t);
  };
  s.initial_velocity = ex.velocity;
  s.initial_pressure = ex.pressure;
  s.dirichlet = ex.velocity;
  s.exact = ex;
  s.T = 1.0;
  s.default_dt = 1e-2;
  return s;
}

ProblemSpec problem_stationary(double nu) {
  ProblemSpec s;
  s.name = "stationary";
  s.nu = nu;
  s.model = FlowModel::Stokes;
  ExactSolution ex;
  ex.velocity = [](double x, double y, double) { return Vec2{x * x, -2 * x * y}; };
  ex.velocity_gradient = [](double x, double y, double) {
    return std::array<double, 4>{2 * x, 0.0, -2 * y, -2 * x};
  };
  ex.pressure = [](double x, double y, double) { return x + y; };
  s.initial_velocity = ex.velocity;
  s.initial_pressure = ex.pressure;
  s.dirichlet = ex.velocity;
  s.body_force = [nu](double, double, double) { return Vec2{-2 * nu + 1, 1.0}; };
  s.exact = ex;
  s.T = 0.5;
  s.default_dt = 1e-2;
  return s;
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"potential_flow", "potential_flow_forced",
                                              "gresho",         "gresho_moving",
                                              "taylor_green",   "stationary"};
  return names;
}

ProblemSpec make_problem(const std::string& name, std::optional<double> nu) {
  if (nu && !(*nu > 0.0)) throw std::invalid_argument("make_problem: nu must be positive");
  if (name == "potential_flow" || name == "potential_flow_forced")
    return problem_potential_flow(name == "potential_flow_forced", nu.value_or(0.1));
  if (name == "stationary") return problem_stationary(nu.value_or(0.05));
  ProblemSpec s;
  if (name == "gresho" || name == "gresho_moving") {
    s = problem_gresho(name == "gresho_moving");
    if (nu) s.nu = *nu;
    return s;
  }
  if (name == "taylor_green") {
    if (nu && *nu != 0.01)
      throw std::invalid_argument("make_problem: the Taylor-Green solution is built for nu = 0.01");
    return problem_taylor_green_2d();
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

// ---------------------------------------------------------------------------------------
// configuration

void validate(const RunConfig& c) {
  auto fail = [](const std::string& key, const std::string& what) {
    throw ConfigError(key + ": " + what);
  };
  const auto& names = problem_names();
  if (std::find(names.begin(), names.end(), c.problem) == names.end())
    fail("problem.name", "unknown problem '" + c.problem + "'");
  if (c.nu && !(*c.nu > 0.0)) fail("problem.nu", "must be positive");
  if (c.final_time && !std::isfinite(*c.final_time)) fail("problem.final_time", "must be finite");
  if (c.degree < 2) fail("discretization.degree", "must be >= 2 (pressure degree p-1 >= 1)");
  if (c.nx < 1) fail("discretization.nx", "must be positive");
  if (c.ny < 1) fail("discretization.ny", "must be positive");
  if (c.dt && !(*c.dt > 0.0)) fail("discretization.dt", "must be positive");
  if (c.rt_degree) {
    if (c.variant == ProjectionKind::HelmholtzRT && *c.rt_degree != c.degree - 1)
      fail("projection.rt_degree", "the Helmholtz flux variant reconstructs in RT^(p-1)");
    if (*c.rt_degree < 0 || *c.rt_degree > c.degree - 1)
      fail("projection.rt_degree", "must lie in [0, p-1]");
  }
  if (c.tau_d && !(*c.tau_d >= 0.0)) fail("projection.tau_d", "must be nonnegative");
  if (c.tau_c && !(*c.tau_c >= 0.0)) fail("projection.tau_c", "must be nonnegative");
  if (!(c.omega > 0.0)) fail("projection.omega", "must be positive");
  if (!(c.poisson_tol > 0.0)) fail("solver.poisson_tol", "must be positive");
  if (!(c.penalty_tol > 0.0)) fail("solver.penalty_tol", "must be positive");
  if (!(c.stokes_tol > 0.0)) fail("solver.stokes_tol", "must be positive");
  if (!(c.newton_tol > 0.0)) fail("solver.newton_tol", "must be positive");
  if (c.max_iterations < 1) fail("solver.max_iterations", "must be positive");
  if (c.every < 1) fail("output.every", "must be positive");
}

namespace {

namespace pt = boost::property_tree;

template <typename T>
T convert(const pt::ptree& node, const std::string& key) {
  const std::string& raw = node.data();
  if constexpr (std::is_same_v<T, std::string>) {
    return raw;
  } else {
    T value{};
    const char* end = raw.data() + raw.size();
    const auto res = std::from_chars(raw.data(), end, value);
    if (raw.empty() || res.ec != std::errc() || res.ptr != end)
      throw ConfigError(key + ": invalid value '" + raw + "'");
    return value;
  }
}

using Setter = std::function<void(RunConfig&, const pt::ptree&, const std::string&)>;

template <typename T>
Setter set(T RunConfig::*field) {
  return [field](RunConfig& c, const pt::ptree& n, const std::string& key) {
    c.*field = convert<T>(n, key);
  };
}

template <typename T>
Setter set(std::optional<T> RunConfig::*field) {
  return [field](RunConfig& c, const pt::ptree& n, const std::string& key) {
    c.*field = convert<T>(n, key);
  };
}

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s{
      {"problem",
       {{"name", set(&RunConfig::problem)},
        {"nu", set(&RunConfig::nu)},
        {"final_time", set(&RunConfig::final_time)}}},
      {"discretization",
       {{"degree", set(&RunConfig::degree)},
        {"nx", set(&RunConfig::nx)},
        {"ny", set(&RunConfig::ny)},
        {"dt", set(&RunConfig::dt)}}},
      {"projection",
       {{"variant",
         [](RunConfig& c, const pt::ptree& n, const std::string& key) {
           try {
             c.variant = parse_projection_kind(n.data());
           } catch (const std::invalid_argument& e) {
             throw ConfigError(key + ": " + e.what());
           }
         }},
        {"rt_degree", set(&RunConfig::rt_degree)},
        {"tau_d", set(&RunConfig::tau_d)},
        {"tau_c", set(&RunConfig::tau_c)},
        {"omega", set(&RunConfig::omega)}}},
      {"solver",
       {{"poisson_tol", set(&RunConfig::poisson_tol)},
        {"penalty_tol", set(&RunConfig::penalty_tol)},
        {"stokes_tol", set(&RunConfig::stokes_tol)},
        {"newton_tol", set(&RunConfig::newton_tol)},
        {"max_iterations", set(&RunConfig::max_iterations)}}},
      {"output", {{"path", set(&RunConfig::output)}, {"every", set(&RunConfig::every)}}},
  };
  return s;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  for (const auto& [section, node] : tree) {
    if (node.empty())
      throw ConfigError(source + ": key '" + section + "' outside of a section");
    const auto sec = schema().find(section);
    if (sec == schema().end())
      throw ConfigError(source + ": unknown section [" + section + "]");
    for (const auto& [key, value] : node) {
      const std::string full = section + "." + key;
      const auto it = sec->second.find(key);
      if (it == sec->second.end()) throw ConfigError(source + ": unknown key '" + full + "'");
      try {
        it->second(c, value, full);
      } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
      }
    }
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  auto opt = [&o](const char* key, const auto& v) {
    if (v) o << key << " = " << format_double(static_cast<double>(*v)) << "\n";
  };
  o << "[problem]\nname = " << c.problem << "\n";
  opt("nu", c.nu);
  opt("final_time", c.final_time);
  o << "\n[discretization]\ndegree = " << c.degree << "\nnx = " << c.nx << "\nny = " << c.ny
    << "\n";
  opt("dt", c.dt);
  o << "\n[projection]\nvariant = " << to_string(c.variant) << "\n";
  if (c.rt_degree) o << "rt_degree = " << *c.rt_degree << "\n";
  opt("tau_d", c.tau_d);
  opt("tau_c", c.tau_c);
  o << "omega = " << format_double(c.omega) << "\n";
  o << "\n[solver]\npoisson_tol = " << format_double(c.poisson_tol)
    << "\npenalty_tol = " << format_double(c.penalty_tol)
    << "\nstokes_tol = " << format_double(c.stokes_tol)
    << "\nnewton_tol = " << format_double(c.newton_tol)
    << "\nmax_iterations = " << c.max_iterations << "\n";
  o << "\n[output]\n";
  if (!c.output.empty()) o << "path = " << c.output << "\n";
  o << "every = " << c.every << "\n";
  return o.str();
}

std::optional<int> effective_rt_degree(const RunConfig& c) {
  switch (c.variant) {
    case ProjectionKind::PressurePoissonRT:
      return c.rt_degree.value_or(c.degree - 2);
    case ProjectionKind::HelmholtzRT:
      return c.degree - 1;
    default:
      return std::nullopt;
  }
}

ProjectionConfig projection_config(const RunConfig& c) {
  ProjectionConfig pc;
  pc.kind = c.variant;
  pc.tau_d = c.tau_d;
  pc.tau_c = c.tau_c;
  if (c.variant == ProjectionKind::PressurePoissonRT) pc.rt_degree = *effective_rt_degree(c);
  pc.poisson_tol = c.poisson_tol;
  pc.penalty_tol = c.penalty_tol;
  pc.max_it = c.max_iterations;
  return pc;
}

SplittingConfig splitting_config(const RunConfig& c, FlowModel model) {
  SplittingConfig sc;
  sc.model = model;
  sc.omega = c.omega;
  sc.projection = projection_config(c);
  sc.stokes_tol = c.stokes_tol;
  sc.newton.tol = c.newton_tol;
  return sc;
}

// ---------------------------------------------------------------------------------------
// CSV

void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records) {
  out << kCsvHeader << "\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  auto opt = [&out](const std::optional<double>& v) {
    out << ',';
    if (v) out << *v;
  };
  for (const auto& r : records) {
    out << r.t << ',' << r.e_kin << ',' << r.enstrophy << ',' << r.dissipation << ','
        << r.max_div << ',' << r.max_mass_residual;
    opt(r.err_v_l2);
    opt(r.err_v_h1);
    opt(r.err_p_l2);
    out << "\n";
  }
  out.flags(flags);
  out.precision(prec);
}

void emit_csv(const std::vector<BenchmarkRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, records);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------------------
// runs

namespace {

const RunConfig& validated(const RunConfig& c) {
  validate(c);
  return c;
}

FormConfig form_config(const ProblemSpec& p) {
  FormConfig fc;
  fc.mu = p.nu * p.rho;
  fc.rho = p.rho;
  fc.body_force = p.body_force;
  fc.dirichlet = p.dirichlet;
  return fc;
}

}  // namespace

Simulation::Simulation(ProblemSpec problem, const RunConfig& config)
    : problem_(std::move(problem)),
      mesh_(validated(config).nx, config.ny, problem_.domain, problem_.periodic),
      forms_(mesh_, config.degree, form_config(problem_)),
      stepper_(forms_, splitting_config(config, problem_.model)),
      dt_(config.dt.value_or(problem_.default_dt)),
      T_(config.final_time.value_or(problem_.T)) {
  const int p = config.degree;
  const double t0 = problem_.t0;
  initial_.t = t0;
  // nodal interpolation for smooth data, a Gauss L2 projection for the kinked Gresho profile
  initial_.v = problem_.exact ? interpolate(mesh_, p, problem_.initial_velocity, t0)
                              : l2_project(mesh_, p, problem_.initial_velocity, t0, p + 6);
  if (problem_.initial_pressure) {
    initial_.p = problem_.exact ? interpolate(mesh_, p - 1, problem_.initial_pressure, t0)
                                : l2_project(mesh_, p - 1, problem_.initial_pressure, t0, p + 6);
    forms_.remove_mean(initial_.p);
  } else {
    initial_.p = initial_pressure(stepper_, initial_.v, t0);
  }
}

BenchmarkRecord Simulation::record(const SplittingState& s) const {
  return make_record(forms_, s.v, s.p, s.t, problem_.nu, problem_.exact ? &*problem_.exact : nullptr);
}

SplittingState Simulation::run(std::vector<BenchmarkRecord>& records, int every) {
  if (every < 1) throw std::invalid_argument("Simulation::run: every must be positive");
  const int n = step_count(initial_.t, T_, dt_);
  records.push_back(record(initial_));
  int k = 0;
  return run_simulation(stepper_, initial_, T_, dt_, [&](const SplittingState& s) {
    ++k;
    if (k % every == 0 || k == n) records.push_back(record(s));
  });
}

std::vector<BenchmarkRecord> run_config(const RunConfig& config) {
  Simulation sim(make_problem(config.problem, config.nu), config);
  std::vector<BenchmarkRecord> records;
  sim.run(records, config.every);
  return records;
}

CumulativeErrors cumulative_errors(const std::vector<BenchmarkRecord>& records) {
  return {cumulative_norm(records, &BenchmarkRecord::err_v_l2),
          cumulative_norm(records, &BenchmarkRecord::err_v_h1),
          cumulative_norm(records, &BenchmarkRecord::err_p_l2)};
}

double observed_rate(double coarse, double fine, double ratio) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(coarse / fine) / std::log(ratio);
}

namespace {

void fill_rates(std::vector<ConvergenceRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    const double ratio = a.h / b.h;
    rows[i].rates = CumulativeErrors{
        observed_rate(a.errors.velocity_l2, b.errors.velocity_l2, ratio),
        observed_rate(a.errors.velocity_h1, b.errors.velocity_h1, ratio),
        observed_rate(a.errors.pressure_l2, b.errors.pressure_l2, ratio)};
  }
}

}  // namespace

std::vector<ConvergenceRow> spatial_convergence(const RunConfig& base,
                                                const std::vector<int>& levels) {
  std::vector<ConvergenceRow> rows;
  for (int l : levels) {
    if (l < 0 || l > 10) throw std::invalid_argument("spatial_convergence: level out of range");
    RunConfig c = base;
    c.nx = c.ny = 1 << (l + 2);
    c.every = 1;
    const ProblemSpec problem = make_problem(c.problem, c.nu);
    Simulation sim(problem, c);
    std::vector<BenchmarkRecord> records;
    sim.run(records);
    ConvergenceRow row;
    row.cells = c.nx;
    row.h = (problem.domain.x_max - problem.domain.x_min) / c.nx;
    row.errors = cumulative_errors(records);
    rows.push_back(row);
  }
  fill_rates(rows);
  return rows;
}

std::vector<ConvergenceRow> temporal_convergence(const RunConfig& base,
                                                 const std::vector<double>& dts) {
  std::vector<ConvergenceRow> rows;
  for (double dt : dts) {
    RunConfig c = base;
    c.dt = dt;
    Simulation sim(make_problem(c.problem, c.nu), c);
    if (!sim.problem().exact)
      throw std::invalid_argument("temporal_convergence: problem has no exact solution");
    std::vector<BenchmarkRecord> records;
    sim.run(records, std::numeric_limits<int>::max());
    const BenchmarkRecord& last = records.back();
    ConvergenceRow row;
    row.cells = step_count(sim.initial_state().t, sim.final_time(), dt);
    row.h = dt;
    row.errors = {*last.err_v_l2, *last.err_v_h1, *last.err_p_l2};
    rows.push_back(row);
  }
  fill_rates(rows);
  return rows;
}

void write_convergence_table(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "n,h,err_v_l2,rate_v_l2,err_v_h1,rate_v_h1,err_p_l2,rate_p_l2\n";
  out << std::setprecision(6);
  for (const auto& r : rows) {
    auto rate = [&](double CumulativeErrors::*f) {
      return r.rates ? format_double(std::round((*r.rates).*f * 1000) / 1000) : std::string();
    };
    out << r.cells << ',' << r.h << ',' << r.errors.velocity_l2 << ','
        << rate(&CumulativeErrors::velocity_l2) << ',' << r.errors.velocity_h1 << ','
        << rate(&CumulativeErrors::velocity_h1) << ',' << r.errors.pressure_l2 << ','
        << rate(&CumulativeErrors::pressure_l2) << "\n";
  }
}

std::vector<RobustnessRow> robustness_sweep(const RunConfig& base, const std::vector<double>& nus) {
  std::vector<RobustnessRow> rows;
  for (double nu : nus) {
    RunConfig c = base;
    c.nu = nu;
    c.every = 1;
    rows.push_back({nu, cumulative_errors(run_config(c))});
  }
  return rows;
}

void write_robustness_table(std::ostream& out, const std::vector<RobustnessRow>& rows) {
  out << "nu,err_v_l2,err_v_h1,err_p_l2\n";
  out << std::setprecision(6);
  for (const auto& r : rows)
    out << r.nu << ',' << r.errors.velocity_l2 << ',' << r.errors.velocity_h1 << ','
        << r.errors.pressure_l2 << "\n";
}

// ---------------------------------------------------------------------------------------
// projection checks

ProjectionCheck check_projection(ProjectionKind kind, int degree, int cells, int samples,
                                 unsigned seed, bool periodic) {
  const StructuredMesh2D mesh(cells, cells, {}, {periodic, periodic});
  const DGForms forms(mesh, degree, FormConfig{});
  ProjectionConfig pc;
  pc.kind = kind;
  pc.dt = 0.01;
  pc.nu = 0.01;
  pc.poisson_tol = 1e-14;
  const Projector proj(forms, pc);
  const auto rule = unit_gauss(degree + 2);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ProjectionCheck out;
  for (int s = 0; s < samples; ++s) {
    DGField w = forms.velocity_field();
    for (Eigen::Index i = 0; i < w.size(); ++i) w.coeffs[i] = dist(gen);
    const double nw = forms.l2_norm(w);
    const DGField v = proj.project(w, 0.0).v;
    double div = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c)
      for (double x : rule.points)
        for (double y : rule.points)
          div = std::max(div, std::abs(v.gradient(c, 0, x, y)[0] + v.gradient(c, 1, x, y)[1]));
    const DGField cont = forms.discrete_divergence(v, 0.0);
    double mass = 0.0;
    for (double r : forms.local_mass_residual(v, 0.0)) mass = std::max(mass, std::abs(r));
    DGField twice = proj.project(v, 0.0).v;
    twice.coeffs -= v.coeffs;
    // discrete_divergence returns the Riesz representative; b(v, q_i) - r(q_i) = -(M B_h v)_i
    const DGField residual = forms.apply_mass(cont);
    out.max_divergence = std::max(out.max_divergence, div / nw);
    out.max_continuity = std::max(out.max_continuity, residual.coeffs.cwiseAbs().maxCoeff() / nw);
    out.max_mass_residual = std::max(out.max_mass_residual, mass / nw);
    out.max_idempotence = std::max(out.max_idempotence, forms.l2_norm(twice) / nw);
  }
  return out;
}

}  // namespace dgflow
