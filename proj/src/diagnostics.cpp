#include "dgflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dgflow/basis.hpp"

namespace dgflow {

using Eigen::MatrixXd;

namespace {

/// Visits every cell with the quadrature values of all components of a field.
class CellSampler {
 public:
  explicit CellSampler(const DGField& u)
      : u_(u), tables_(TensorBasis1D(u.degree), unit_gauss(u.degree + 2)),
        values_(u.components) {
    const double j = u.mesh->cell_measure();
    weights_.resize(tables_.n_q, tables_.n_q);
    for (int qy = 0; qy < tables_.n_q; ++qy)
      for (int qx = 0; qx < tables_.n_q; ++qx)
        weights_(qx, qy) = tables_.weights[qx] * tables_.weights[qy] * j;
  }

  template <typename F>
  void for_each_cell(F&& f) {
    for (int c = 0; c < u_.mesh->n_cells(); ++c) {
      for (int k = 0; k < u_.components; ++k)
        eval_cell(u_.block(c, k), tables_, u_.mesh->hx(), u_.mesh->hy(), values_[k]);
      f(c, values_);
    }
  }

  [[nodiscard]] const MatrixXd& weights() const { return weights_; }
  [[nodiscard]] const BasisTables& tables() const { return tables_; }

 private:
  const DGField& u_;
  BasisTables tables_;
  std::vector<CellQuadValues> values_;
  MatrixXd weights_;
};

void require_velocity(const DGField& v, const char* what) {
  if (!v.mesh || v.components != 2)
    throw std::invalid_argument(std::string(what) + ": expected a velocity field");
}

}  // namespace

double kinetic_energy(const DGField& v) {
  require_velocity(v, "kinetic_energy");
  CellSampler s(v);
  double sum = 0.0;
  s.for_each_cell([&](int, const std::vector<CellQuadValues>& q) {
    sum += (q[0].value.array().square() + q[1].value.array().square())
               .matrix()
               .cwiseProduct(s.weights())
               .sum();
  });
  return 0.5 * sum;
}

double enstrophy(const DGField& v) {
  require_velocity(v, "enstrophy");
  CellSampler s(v);
  double sum = 0.0;
  s.for_each_cell([&](int, const std::vector<CellQuadValues>& q) {
    sum += (q[1].dx - q[0].dy).array().square().matrix().cwiseProduct(s.weights()).sum();
  });
  return 0.5 * sum;
}

double dissipation(const DGField& v, double nu) {
  require_velocity(v, "dissipation");
  CellSampler s(v);
  double sum = 0.0;
  s.for_each_cell([&](int, const std::vector<CellQuadValues>& q) {
    for (int k = 0; k < 2; ++k)
      sum += (q[k].dx.array().square() + q[k].dy.array().square())
                 .matrix()
                 .cwiseProduct(s.weights())
                 .sum();
  });
  return nu / v.mesh->domain_measure() * sum;
}

double max_pointwise_divergence(const DGField& v) {
  require_velocity(v, "max_pointwise_divergence");
  CellSampler s(v);
  double worst = 0.0;
  s.for_each_cell([&](int, const std::vector<CellQuadValues>& q) {
    worst = std::max(worst, (q[0].dx + q[1].dy).cwiseAbs().maxCoeff());
  });
  return worst;
}

double max_local_mass_residual(const DGForms& forms, const DGField& v, double t) {
  double worst = 0.0;
  for (double r : forms.local_mass_residual(v, t)) worst = std::max(worst, std::abs(r));
  return worst;
}

ErrorNorms error_norms(const DGField& v, const DGField& p, const ExactSolution& exact, double t) {
  require_velocity(v, "error_norms");
  if (p.mesh != v.mesh || p.components != 1)
    throw std::invalid_argument("error_norms: pressure must be a scalar field on the same mesh");
  const StructuredMesh2D& m = *v.mesh;
  ErrorNorms out;
  CellSampler sv(v);
  const auto& pts = sv.tables().points;
  const int nq = sv.tables().n_q;
  auto coords = [&](int c, int qx, int qy) {
    const auto o = m.cell_origin(c);
    return std::array<double, 2>{o[0] + pts[qx] * m.hx(), o[1] + pts[qy] * m.hy()};
  };
  double l2 = 0.0, h1 = 0.0;
  sv.for_each_cell([&](int c, const std::vector<CellQuadValues>& q) {
    for (int qy = 0; qy < nq; ++qy)
      for (int qx = 0; qx < nq; ++qx) {
        const auto x = coords(c, qx, qy);
        const double w = sv.weights()(qx, qy);
        const Vec2 ve = exact.velocity(x[0], x[1], t);
        for (int k = 0; k < 2; ++k) l2 += std::pow(q[k].value(qx, qy) - ve[k], 2) * w;
        if (exact.velocity_gradient) {
          const auto g = exact.velocity_gradient(x[0], x[1], t);
          for (int k = 0; k < 2; ++k)
            h1 += (std::pow(q[k].dx(qx, qy) - g[2 * k], 2) +
                   std::pow(q[k].dy(qx, qy) - g[2 * k + 1], 2)) *
                  w;
        }
      }
  });
  out.velocity_l2 = std::sqrt(l2);
  out.velocity_h1 = std::sqrt(h1);
  if (!exact.pressure) return out;

  // pressure on the velocity quadrature grid, which integrates degree p-1 squared exactly
  const BasisTables tp(TensorBasis1D(p.degree), unit_gauss(v.degree + 2));
  std::vector<MatrixXd> diff(m.n_cells());
  double mean = 0.0;
  MatrixXd vals;
  for (int c = 0; c < m.n_cells(); ++c) {
    eval_cell_values(p.block(c), tp, vals);
    diff[c].resize(nq, nq);
    for (int qy = 0; qy < nq; ++qy)
      for (int qx = 0; qx < nq; ++qx) {
        const auto x = coords(c, qx, qy);
        diff[c](qx, qy) = vals(qx, qy) - exact.pressure(x[0], x[1], t);
      }
    mean += diff[c].cwiseProduct(sv.weights()).sum();
  }
  mean /= m.domain_measure();
  double pl2 = 0.0;
  for (const auto& d : diff)
    pl2 += (d.array() - mean).square().matrix().cwiseProduct(sv.weights()).sum();
  out.pressure_l2 = std::sqrt(pl2);
  return out;
}

BenchmarkRecord make_record(const DGForms& forms, const DGField& v, const DGField& p, double t,
                            double nu, const ExactSolution* exact) {
  BenchmarkRecord r;
  r.t = t;
  r.e_kin = kinetic_energy(v);
  r.enstrophy = enstrophy(v);
  r.dissipation = dissipation(v, nu);
  r.max_div = max_pointwise_divergence(v);
  r.max_mass_residual = max_local_mass_residual(forms, v, t);
  if (exact) {
    const ErrorNorms e = error_norms(v, p, *exact, t);
    r.err_v_l2 = e.velocity_l2;
    if (exact->velocity_gradient) r.err_v_h1 = e.velocity_h1;
    if (exact->pressure) r.err_p_l2 = e.pressure_l2;
  }
  return r;
}

double cumulative_norm(const std::vector<double>& t, const std::vector<double>& e) {
  if (t.size() != e.size()) throw std::invalid_argument("cumulative_norm: size mismatch");
  if (t.size() < 2) throw std::invalid_argument("cumulative_norm: needs at least two samples");
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < t[i - 1]) throw std::invalid_argument("cumulative_norm: times must be sorted");
    sum += 0.5 * (e[i - 1] * e[i - 1] + e[i] * e[i]) * (t[i] - t[i - 1]);
  }
  return std::sqrt(sum);
}

double cumulative_norm(const std::vector<BenchmarkRecord>& records,
                       std::optional<double> BenchmarkRecord::*field) {
  std::vector<double> t, e;
  for (const auto& r : records) {
    if (!(r.*field)) throw std::invalid_argument("cumulative_norm: record without error value");
    t.push_back(r.t);
    e.push_back(*(r.*field));
  }
  return cumulative_norm(t, e);
}

}  // namespace dgflow
