#include "dgflow/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dgflow {

QuadratureRule1D QuadratureRule1D::mapped(double a, double b) const {
  QuadratureRule1D r;
  r.points.resize(points.size());
  r.weights.resize(weights.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    r.points[i] = a + 0.5 * (b - a) * (points[i] + 1.0);
    r.weights[i] = 0.5 * (b - a) * weights[i];
  }
  return r;
}

std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  // derivative from the standard identity, valid away from the endpoints
  double dp;
  if (std::abs(1.0 - x * x) > 1e-14) {
    dp = n * (p0 - x * p1) / (1.0 - x * x);
  } else {
    dp = (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0)) * 0.5 * n * (n + 1.0);
  }
  return {p1, dp};
}

std::pair<double, double> shifted_legendre(int n, double x) {
  auto [v, d] = legendre(n, 2.0 * x - 1.0);
  return {v, 2.0 * d};
}

std::vector<double> gll_nodes(int p) {
  if (p < 1) throw std::invalid_argument("gll_nodes: degree must be >= 1");
  std::vector<double> x(p + 1);
  x[0] = -1.0;
  x[p] = 1.0;
  // interior nodes are the roots of P_p'; Newton with P_p'' from the Legendre ODE
  for (int i = 1; i < p; ++i) {
    double xi = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < 100; ++it) {
      auto [pv, dp] = legendre(p, xi);
      const double ddp = (2.0 * xi * dp - p * (p + 1.0) * pv) / (1.0 - xi * xi);
      const double dx = dp / ddp;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    x[i] = xi;
  }
  // enforce exact symmetry
  for (int i = 0; i <= p / 2; ++i) {
    const double s = 0.5 * (x[p - i] - x[i]);
    x[i] = -s;
    x[p - i] = s;
  }
  if (p % 2 == 0) x[p / 2] = 0.0;
  return x;
}

QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  QuadratureRule1D r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      auto [pv, d] = legendre(n, x);
      dp = d;
      const double dx = pv / d;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.points[i] = -x;
    r.points[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.points[n / 2] = 0.0;
  return r;
}

QuadratureRule1D unit_gauss(int n) { return gauss_legendre(n).mapped(0.0, 1.0); }

TensorBasis1D::TensorBasis1D(int degree) : degree_(degree) {
  if (degree < 0) throw std::invalid_argument("TensorBasis1D: negative degree");
  if (degree == 0) {
    // piecewise constants, nodal at the midpoint
    nodes_ = {0.5};
    bary_ = {1.0};
    return;
  }
  auto x = gll_nodes(degree);
  nodes_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) nodes_[i] = 0.5 * (x[i] + 1.0);
  nodes_.front() = 0.0;
  nodes_.back() = 1.0;
  bary_.assign(nodes_.size(), 1.0);
  for (int j = 0; j <= degree_; ++j)
    for (int k = 0; k <= degree_; ++k)
      if (k != j) bary_[j] /= (nodes_[j] - nodes_[k]);
}

Eigen::VectorXd TensorBasis1D::values(double x) const {
  const int n = size();
  Eigen::VectorXd v(n);
  for (int j = 0; j < n; ++j) {
    double prod = 1.0;
    for (int k = 0; k < n; ++k)
      if (k != j) prod *= (x - nodes_[k]);
    v[j] = prod * bary_[j];
  }
  return v;
}

Eigen::VectorXd TensorBasis1D::derivatives(double x) const {
  const int n = size();
  Eigen::VectorXd d(n);
  for (int j = 0; j < n; ++j) {
    double sum = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      double prod = 1.0;
      for (int k = 0; k < n; ++k)
        if (k != j && k != m) prod *= (x - nodes_[k]);
      sum += prod;
    }
    d[j] = sum * bary_[j];
  }
  return d;
}

Eigen::MatrixXd TensorBasis1D::differentiation_matrix() const {
  Eigen::MatrixXd D(size(), size());
  for (int i = 0; i < size(); ++i) D.row(i) = derivatives(nodes_[i]).transpose();
  return D;
}

BasisTables::BasisTables(const TensorBasis1D& basis, const QuadratureRule1D& unit_rule)
    : degree(basis.degree()), n_q(unit_rule.size()),
      weights(unit_rule.weights), points(unit_rule.points) {
  val.resize(n_q, basis.size());
  der.resize(n_q, basis.size());
  for (int q = 0; q < n_q; ++q) {
    val.row(q) = basis.values(points[q]).transpose();
    der.row(q) = basis.derivatives(points[q]).transpose();
  }
  for (int s = 0; s < 2; ++s) {
    end_val[s] = basis.values(static_cast<double>(s));
    end_der[s] = basis.derivatives(static_cast<double>(s));
  }
}

namespace {

void check_shape(const Eigen::Ref<const Eigen::MatrixXd>& U, const BasisTables& t) {
  if (U.rows() != t.degree + 1 || U.cols() != t.degree + 1)
    throw std::invalid_argument("coefficient block does not match the basis degree");
}

}  // namespace

void eval_cell(const Eigen::Ref<const Eigen::MatrixXd>& U, const BasisTables& t, double hx,
               double hy, CellQuadValues& out, bool gradients) {
  check_shape(U, t);
  // first sweep along x, second along y
  const Eigen::MatrixXd bu = t.val * U;  // (qx, j)
  out.value.noalias() = bu * t.val.transpose();
  if (!gradients) return;
  const Eigen::MatrixXd du = t.der * U;
  out.dx.noalias() = (du * t.val.transpose()) / hx;
  out.dy.noalias() = (bu * t.der.transpose()) / hy;
}

void eval_cell_values(const Eigen::Ref<const Eigen::MatrixXd>& U, const BasisTables& t,
                      Eigen::MatrixXd& out) {
  check_shape(U, t);
  out.noalias() = t.val * U * t.val.transpose();
}

void integrate_cell(const BasisTables& t, double hx, double hy, const Eigen::MatrixXd* f,
                    const Eigen::MatrixXd* fx, const Eigen::MatrixXd* fy,
                    Eigen::Ref<Eigen::MatrixXd> U) {
  if (f || fy) {
    Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(t.n_q, t.degree + 1);  // (qx, j)
    if (f) tmp.noalias() += *f * t.val;
    if (fy) tmp.noalias() += (*fy * t.der) / hy;
    U.noalias() += t.val.transpose() * tmp;
  }
  if (fx) {
    U.noalias() += t.der.transpose() * ((*fx * t.val) / hx);
  }
}

void eval_face(const Eigen::Ref<const Eigen::MatrixXd>& U, const BasisTables& t, int axis,
               int side, double h_axis, FaceQuadValues& out, bool derivative) {
  check_shape(U, t);
  if (axis == 0) {
    out.value.noalias() = t.val * (U.transpose() * t.end_val[side]);
    if (derivative)
      out.normal_derivative.noalias() = t.val * (U.transpose() * t.end_der[side]) / h_axis;
  } else {
    out.value.noalias() = t.val * (U * t.end_val[side]);
    if (derivative) out.normal_derivative.noalias() = t.val * (U * t.end_der[side]) / h_axis;
  }
}

void integrate_face(const BasisTables& t, int axis, int side, double h_axis,
                    const Eigen::VectorXd* f, const Eigen::VectorXd* g,
                    Eigen::Ref<Eigen::MatrixXd> U) {
  if (axis == 0) {
    if (f) U.noalias() += t.end_val[side] * (t.val.transpose() * *f).transpose();
    if (g) U.noalias() += (t.end_der[side] / h_axis) * (t.val.transpose() * *g).transpose();
  } else {
    if (f) U.noalias() += (t.val.transpose() * *f) * t.end_val[side].transpose();
    if (g) U.noalias() += (t.val.transpose() * *g) * (t.end_der[side] / h_axis).transpose();
  }
}

}  // namespace dgflow
