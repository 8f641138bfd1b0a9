#include "dense_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace oracle {

namespace {

/// Eigen-decomposition of a symmetric tridiagonal Jacobi matrix with zero diagonal.
void golub_welsch(const std::vector<double>& offdiag_sq, double mu0, std::vector<double>& x,
                  std::vector<double>& w) {
  const int n = static_cast<int>(offdiag_sq.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) J(k, k + 1) = J(k + 1, k) = std::sqrt(offdiag_sq[k]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()[k];
    w[k] = mu0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
}

}  // namespace

void gauss_rule(int n, std::vector<double>& x, std::vector<double>& w) {
  std::vector<double> b;
  for (int k = 1; k < n; ++k) b.push_back(double(k) * k / ((2.0 * k + 1) * (2.0 * k - 1)));
  golub_welsch(b, 2.0, x, w);
  for (int k = 0; k < n; ++k) {
    x[k] = 0.5 * (x[k] + 1.0);
    w[k] *= 0.5;
  }
}

std::vector<double> lobatto_nodes(int p) {
  if (p == 0) return {0.5};
  std::vector<double> nodes{0.0};
  if (p >= 2) {
    std::vector<double> b, x, w;
    for (int k = 1; k < p - 1; ++k) b.push_back(double(k) * (k + 2) / ((2.0 * k + 3) * (2.0 * k + 1)));
    golub_welsch(b, 1.0, x, w);
    for (double xi : x) nodes.push_back(0.5 * (xi + 1.0));
  }
  nodes.push_back(1.0);
  return nodes;
}

double DenseOracle::Basis::value(int i, double x) const {
  double v = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (static_cast<int>(k) != i) v *= (x - nodes[k]) / (nodes[i] - nodes[k]);
  return v;
}

double DenseOracle::Basis::deriv(int i, double x) const {
  double d = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) {
    if (static_cast<int>(m) == i) continue;
    double v = 1.0 / (nodes[i] - nodes[m]);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (static_cast<int>(k) != i && k != m) v *= (x - nodes[k]) / (nodes[i] - nodes[k]);
    d += v;
  }
  return d;
}

DenseOracle::DenseOracle(int nx, int ny, std::array<double, 4> box,
                         std::array<bool, 2> periodic, int p, double mu, double penalty_alpha,
                         VectorFn dirichlet, VectorFn force)
    : nx_(nx), ny_(ny), p_(p), box_(box), hx_((box[1] - box[0]) / nx),
      hy_((box[3] - box[2]) / ny), mu_(mu), alpha_(penalty_alpha), g_(std::move(dirichlet)),
      f_(std::move(force)) {
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      // upper x neighbour
      if (i + 1 < nx) faces_.push_back({0, c, c + 1, 1.0});
      else if (periodic[0]) faces_.push_back({0, c, j * nx, 1.0});
      else faces_.push_back({0, c, -1, 1.0});
      if (i == 0 && !periodic[0]) faces_.push_back({0, c, -1, -1.0});
      if (j + 1 < ny) faces_.push_back({1, c, c + nx, 1.0});
      else if (periodic[1]) faces_.push_back({1, c, i, 1.0});
      else faces_.push_back({1, c, -1, 1.0});
      if (j == 0 && !periodic[1]) faces_.push_back({1, c, -1, -1.0});
    }
}

DenseOracle::Basis DenseOracle::basis(int degree) const { return Basis{lobatto_nodes(degree)}; }

Vec2 DenseOracle::point(int cell, double xr, double yr) const {
  const int i = cell % nx_, j = cell / nx_;
  return {box_[0] + (i + xr) * hx_, box_[2] + (j + yr) * hy_};
}

namespace {

/// Reference coordinates of a face quadrature point seen from a cell side.
std::array<double, 2> face_ref(int axis, double side, double s) {
  return axis == 0 ? std::array<double, 2>{side, s} : std::array<double, 2>{s, side};
}

}  // namespace

Eigen::MatrixXd DenseOracle::sipg_scalar(int degree, double scale, double sigma,
                                         bool dirichlet_faces) const {
  const Basis B = basis(degree);
  const int n = degree + 1, nb = n * n, nc = nx_ * ny_;
  std::vector<double> qx, qw;
  gauss_rule(degree + 2, qx, qw);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nc * nb, nc * nb);
  auto phi = [&](int loc, double xr, double yr) {
    return B.value(loc % n, xr) * B.value(loc / n, yr);
  };
  auto grad = [&](int loc, double xr, double yr) {
    return Vec2{B.deriv(loc % n, xr) * B.value(loc / n, yr) / hx_,
                B.value(loc % n, xr) * B.deriv(loc / n, yr) / hy_};
  };
  for (int c = 0; c < nc; ++c)
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b) {
        double s = 0.0;
        for (std::size_t kx = 0; kx < qx.size(); ++kx)
          for (std::size_t ky = 0; ky < qx.size(); ++ky) {
            const Vec2 ga = grad(a, qx[kx], qx[ky]), gb = grad(b, qx[kx], qx[ky]);
            s += (ga[0] * gb[0] + ga[1] * gb[1]) * qw[kx] * qw[ky] * hx_ * hy_;
          }
        A(c * nb + a, c * nb + b) += scale * s;
      }

  struct Side {
    int cell;
    double ref;     // reference coordinate along the face normal axis
    double jump;    // contribution factor of the trace to the jump
    double avg;     // contribution factor to the average
  };
  for (const FaceRec& f : faces_) {
    std::vector<Side> sides;
    if (f.cr >= 0) {
      sides = {{f.cl, 1.0, 1.0, 0.5}, {f.cr, 0.0, -1.0, 0.5}};
    } else {
      if (!dirichlet_faces) continue;
      sides = {{f.cl, f.sign > 0 ? 1.0 : 0.0, 1.0, 1.0}};
    }
    const double measure = f.axis == 0 ? hy_ : hx_;
    const double pen = sigma / (hx_ * hy_ / measure);
    for (const Side& si : sides)
      for (const Side& sj : sides)
        for (int a = 0; a < nb; ++a)
          for (int b = 0; b < nb; ++b) {
            double s = 0.0;
            for (std::size_t k = 0; k < qx.size(); ++k) {
              const auto ri = face_ref(f.axis, si.ref, qx[k]);
              const auto rj = face_ref(f.axis, sj.ref, qx[k]);
              // test a on si, trial b on sj
              const double ja = si.jump * phi(a, ri[0], ri[1]);
              const double jb = sj.jump * phi(b, rj[0], rj[1]);
              const double da = si.avg * f.sign * grad(a, ri[0], ri[1])[f.axis];
              const double db = sj.avg * f.sign * grad(b, rj[0], rj[1])[f.axis];
              s += (-db * ja - da * jb + pen * ja * jb) * qw[k] * measure;
            }
            A(si.cell * nb + a, sj.cell * nb + b) += scale * s;
          }
  }
  return A;
}

Eigen::MatrixXd DenseOracle::a_matrix() const {
  const double sigma = alpha_ * p_ * (p_ + 1);
  const Eigen::MatrixXd S = sipg_scalar(p_, mu_, sigma, true);
  const int nb = (p_ + 1) * (p_ + 1), nc = nx_ * ny_;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * nc * nb, 2 * nc * nb);
  for (int c1 = 0; c1 < nc; ++c1)
    for (int c2 = 0; c2 < nc; ++c2)
      for (int k = 0; k < 2; ++k)
        A.block((c1 * 2 + k) * nb, (c2 * 2 + k) * nb, nb, nb) = S.block(c1 * nb, c2 * nb, nb, nb);
  return A;
}

Eigen::MatrixXd DenseOracle::alpha_matrix() const {
  return sipg_scalar(p_ - 1, 1.0, alpha_ * (p_ - 1) * p_, false);
}

Eigen::MatrixXd DenseOracle::mass_matrix(int degree, int comps) const {
  const Basis B = basis(degree);
  const int n = degree + 1, nb = n * n, nc = nx_ * ny_;
  std::vector<double> qx, qw;
  gauss_rule(degree + 2, qx, qw);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nc * comps * nb, nc * comps * nb);
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < comps; ++k)
      for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b) {
          double s = 0.0;
          for (std::size_t kx = 0; kx < qx.size(); ++kx)
            for (std::size_t ky = 0; ky < qx.size(); ++ky)
              s += B.value(a % n, qx[kx]) * B.value(a / n, qx[ky]) * B.value(b % n, qx[kx]) *
                   B.value(b / n, qx[ky]) * qw[kx] * qw[ky] * hx_ * hy_;
          M((c * comps + k) * nb + a, (c * comps + k) * nb + b) = s;
        }
  return M;
}

Eigen::MatrixXd DenseOracle::b_matrix() const {
  const Basis V = basis(p_), Q = basis(p_ - 1);
  const int nv = p_ + 1, nq = p_, nbv = nv * nv, nbq = nq * nq, nc = nx_ * ny_;
  std::vector<double> qx, qw;
  gauss_rule(p_ + 2, qx, qw);
  Eigen::MatrixXd Bm = Eigen::MatrixXd::Zero(nc * nbq, nc * 2 * nbv);
  auto vphi = [&](int loc, double xr, double yr) {
    return V.value(loc % nv, xr) * V.value(loc / nv, yr);
  };
  auto qphi = [&](int loc, double xr, double yr) {
    return Q.value(loc % nq, xr) * Q.value(loc / nq, yr);
  };
  for (int c = 0; c < nc; ++c)
    for (int a = 0; a < nbq; ++a)
      for (int k = 0; k < 2; ++k)
        for (int b = 0; b < nbv; ++b) {
          double s = 0.0;
          for (std::size_t kx = 0; kx < qx.size(); ++kx)
            for (std::size_t ky = 0; ky < qx.size(); ++ky) {
              const double x = qx[kx], y = qx[ky];
              const double div = k == 0 ? V.deriv(b % nv, x) * V.value(b / nv, y) / hx_
                                        : V.value(b % nv, x) * V.deriv(b / nv, y) / hy_;
              s -= div * qphi(a, x, y) * qw[kx] * qw[ky] * hx_ * hy_;
            }
          Bm(c * nbq + a, (c * 2 + k) * nbv + b) += s;
        }
  for (const FaceRec& f : faces_) {
    const double measure = f.axis == 0 ? hy_ : hx_;
    struct Side {
      int cell;
      double ref, jump, avg;
    };
    std::vector<Side> sides;
    if (f.cr >= 0) sides = {{f.cl, 1.0, 1.0, 0.5}, {f.cr, 0.0, -1.0, 0.5}};
    else sides = {{f.cl, f.sign > 0 ? 1.0 : 0.0, 1.0, 1.0}};
    for (const Side& sq : sides)
      for (const Side& sv : sides)
        for (int a = 0; a < nbq; ++a)
          for (int b = 0; b < nbv; ++b) {
            double s = 0.0;
            for (std::size_t k = 0; k < qx.size(); ++k) {
              const auto rq = face_ref(f.axis, sq.ref, qx[k]);
              const auto rv = face_ref(f.axis, sv.ref, qx[k]);
              s += sv.jump * f.sign * vphi(b, rv[0], rv[1]) * sq.avg * qphi(a, rq[0], rq[1]) *
                   qw[k] * measure;
            }
            Bm(sq.cell * nbq + a, (sv.cell * 2 + f.axis) * nbv + b) += s;
          }
  }
  return Bm;
}

Eigen::VectorXd DenseOracle::c_residual(const Eigen::VectorXd& v, double t) const {
  const Basis V = basis(p_);
  const int n = p_ + 1, nb = n * n, nc = nx_ * ny_;
  std::vector<double> qx, qw;
  gauss_rule(p_ + 2, qx, qw);
  auto phi = [&](int loc, double xr, double yr) {
    return V.value(loc % n, xr) * V.value(loc / n, yr);
  };
  auto eval = [&](int cell, double xr, double yr) {
    Vec2 u{0.0, 0.0};
    for (int k = 0; k < 2; ++k)
      for (int b = 0; b < nb; ++b) u[k] += v[(cell * 2 + k) * nb + b] * phi(b, xr, yr);
    return u;
  };
  Eigen::VectorXd res = Eigen::VectorXd::Zero(v.size());
  for (int c = 0; c < nc; ++c)
    for (std::size_t kx = 0; kx < qx.size(); ++kx)
      for (std::size_t ky = 0; ky < qx.size(); ++ky) {
        const double x = qx[kx], y = qx[ky];
        const Vec2 u = eval(c, x, y);
        const double w = qw[kx] * qw[ky] * hx_ * hy_;
        for (int k = 0; k < 2; ++k)
          for (int a = 0; a < nb; ++a) {
            const double gx = V.deriv(a % n, x) * V.value(a / n, y) / hx_;
            const double gy = V.value(a % n, x) * V.deriv(a / n, y) / hy_;
            res[(c * 2 + k) * nb + a] -= (u[k] * u[0] * gx + u[k] * u[1] * gy) * w;
          }
      }
  for (const FaceRec& f : faces_) {
    const double measure = f.axis == 0 ? hy_ : hx_;
    for (std::size_t q = 0; q < qx.size(); ++q) {
      const double wq = qw[q] * measure;
      if (f.cr >= 0) {
        const auto rl = face_ref(f.axis, 1.0, qx[q]), rr = face_ref(f.axis, 0.0, qx[q]);
        const Vec2 ul = eval(f.cl, rl[0], rl[1]), ur = eval(f.cr, rr[0], rr[1]);
        const double vn = 0.5 * (ul[f.axis] + ur[f.axis]);
        for (int k = 0; k < 2; ++k) {
          const double flux = std::max(vn, 0.0) * ul[k] + std::min(vn, 0.0) * ur[k];
          for (int a = 0; a < nb; ++a) {
            res[(f.cl * 2 + k) * nb + a] += flux * phi(a, rl[0], rl[1]) * wq;
            res[(f.cr * 2 + k) * nb + a] -= flux * phi(a, rr[0], rr[1]) * wq;
          }
        }
      } else {
        const auto r = face_ref(f.axis, f.sign > 0 ? 1.0 : 0.0, qx[q]);
        const Vec2 u = eval(f.cl, r[0], r[1]);
        const Vec2 xp = point(f.cl, r[0], r[1]);
        const Vec2 g = g_ ? g_(xp[0], xp[1], t) : Vec2{0.0, 0.0};
        const double vn = f.sign * u[f.axis];
        for (int k = 0; k < 2; ++k) {
          const double flux = std::max(vn, 0.0) * u[k] + std::min(vn, 0.0) * g[k];
          for (int a = 0; a < nb; ++a)
            res[(f.cl * 2 + k) * nb + a] += flux * phi(a, r[0], r[1]) * wq;
        }
      }
    }
  }
  return res;
}

Eigen::VectorXd DenseOracle::l_vector(double t) const {
  const Basis V = basis(p_);
  const int n = p_ + 1, nb = n * n, nc = nx_ * ny_;
  std::vector<double> qx, qw;
  gauss_rule(p_ + 2, qx, qw);
  Eigen::VectorXd l = Eigen::VectorXd::Zero(nc * 2 * nb);
  if (f_)
    for (int c = 0; c < nc; ++c)
      for (std::size_t kx = 0; kx < qx.size(); ++kx)
        for (std::size_t ky = 0; ky < qx.size(); ++ky) {
          const Vec2 xp = point(c, qx[kx], qx[ky]);
          const Vec2 fv = f_(xp[0], xp[1], t);
          for (int k = 0; k < 2; ++k)
            for (int a = 0; a < nb; ++a)
              l[(c * 2 + k) * nb + a] += fv[k] * V.value(a % n, qx[kx]) *
                                         V.value(a / n, qx[ky]) * qw[kx] * qw[ky] * hx_ * hy_;
        }
  if (!g_) return l;
  const double sigma = alpha_ * p_ * (p_ + 1);
  for (const FaceRec& f : faces_) {
    if (f.cr >= 0) continue;
    const double measure = f.axis == 0 ? hy_ : hx_;
    const double pen = sigma * measure / (hx_ * hy_);
    for (std::size_t q = 0; q < qx.size(); ++q) {
      const auto r = face_ref(f.axis, f.sign > 0 ? 1.0 : 0.0, qx[q]);
      const Vec2 xp = point(f.cl, r[0], r[1]);
      const Vec2 g = g_(xp[0], xp[1], t);
      for (int k = 0; k < 2; ++k)
        for (int a = 0; a < nb; ++a) {
          const double ph = V.value(a % n, r[0]) * V.value(a / n, r[1]);
          const double dn = f.sign * (f.axis == 0
                                          ? V.deriv(a % n, r[0]) * V.value(a / n, r[1]) / hx_
                                          : V.value(a % n, r[0]) * V.deriv(a / n, r[1]) / hy_);
          l[(f.cl * 2 + k) * nb + a] += mu_ * (pen * g[k] * ph - g[k] * dn) * qw[q] * measure;
        }
    }
  }
  return l;
}

Eigen::VectorXd DenseOracle::r_vector(double t) const {
  const Basis Q = basis(p_ - 1);
  const int n = p_, nb = n * n, nc = nx_ * ny_;
  std::vector<double> qx, qw;
  gauss_rule(p_ + 2, qx, qw);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(nc * nb);
  if (!g_) return r;
  for (const FaceRec& f : faces_) {
    if (f.cr >= 0) continue;
    const double measure = f.axis == 0 ? hy_ : hx_;
    for (std::size_t q = 0; q < qx.size(); ++q) {
      const auto rr = face_ref(f.axis, f.sign > 0 ? 1.0 : 0.0, qx[q]);
      const Vec2 xp = point(f.cl, rr[0], rr[1]);
      const double gn = f.sign * g_(xp[0], xp[1], t)[f.axis];
      for (int a = 0; a < nb; ++a)
        r[f.cl * nb + a] += gn * Q.value(a % n, rr[0]) * Q.value(a / n, rr[1]) * qw[q] * measure;
    }
  }
  return r;
}

}  // namespace oracle
