#include "dgflow/krylov.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dgflow {

using Eigen::VectorXd;

namespace {

void project_mean(VectorXd& v) { v.array() -= v.mean(); }

}  // namespace

SolveReport cg_solve(const LinearOperator& op, const VectorXd& b_in, VectorXd& x, double tol,
                     int max_it, const VectorApply& precond) {
  SolveReport rep;
  if (x.size() != b_in.size()) x = VectorXd::Zero(b_in.size());
  VectorXd b = b_in;
  if (op.constant_null_space) {
    project_mean(b);
    project_mean(x);
  }
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    rep.converged = true;
    return rep;
  }
  VectorXd r(b.size()), z(b.size()), p, q(b.size());
  op.apply(x, q);
  r = b - q;
  if (op.constant_null_space) project_mean(r);
  double rnorm = r.norm();
  auto precondition = [&](const VectorXd& in, VectorXd& out) {
    if (precond) precond(in, out);
    else out = in;
    if (op.constant_null_space) project_mean(out);
  };
  precondition(r, z);
  p = z;
  double rz = r.dot(z);
  while (rnorm > tol * bnorm) {
    if (rep.iterations >= max_it) {
      rep.message = "maximum iterations reached";
      rep.relative_residual = rnorm / bnorm;
      return rep;
    }
    op.apply(p, q);
    const double curv = p.dot(q);
    if (!(curv > 0.0)) {
      rep.message = "breakdown: nonpositive curvature";
      rep.relative_residual = rnorm / bnorm;
      return rep;
    }
    const double alpha = rz / curv;
    x += alpha * p;
    r -= alpha * q;
    if (op.constant_null_space) project_mean(r);
    rnorm = r.norm();
    ++rep.iterations;
    precondition(r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (op.constant_null_space) project_mean(x);
  rep.relative_residual = rnorm / bnorm;
  rep.converged = true;
  return rep;
}

SolveReport gmres_solve(const LinearOperator& op, const VectorXd& b, VectorXd& x, double tol,
                        int max_it, int restart, const VectorApply& precond) {
  SolveReport rep;
  const Eigen::Index n = b.size();
  if (x.size() != n) x = VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    rep.converged = true;
    return rep;
  }
  restart = std::max(1, restart);
  Eigen::MatrixXd V(n, restart + 1), H = Eigen::MatrixXd::Zero(restart + 1, restart);
  VectorXd cs(restart), sn(restart), g(restart + 1), w(n), z(n);
  VectorXd r(n);
  auto apply_precond = [&](const VectorXd& in, VectorXd& out) {
    if (precond) precond(in, out);
    else out = in;
  };
  while (true) {
    op.apply(x, w);
    r = b - w;
    double beta = r.norm();
    rep.relative_residual = beta / bnorm;
    if (beta <= tol * bnorm) {
      rep.converged = true;
      return rep;
    }
    if (rep.iterations >= max_it) {
      rep.message = "maximum iterations reached";
      return rep;
    }
    V.col(0) = r / beta;
    g.setZero();
    g[0] = beta;
    int j = 0;
    for (; j < restart && rep.iterations < max_it; ++j) {
      apply_precond(V.col(j), z);
      op.apply(z, w);
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        H(i, j) = w.dot(V.col(i));
        w -= H(i, j) * V.col(i);
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0.0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double d = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / d;
      sn[j] = H(j + 1, j) / d;
      H(j, j) = d;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      if (std::abs(g[j + 1]) <= tol * bnorm) {
        ++j;
        break;
      }
    }
    const VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    apply_precond(V.leftCols(j) * y, z);
    x += z;
  }
}

NewtonReport newton_krylov_solve(const ResidualFunction& residual, VectorXd& x,
                                 const NewtonOptions& opts, const VectorApply& precond) {
  NewtonReport rep;
  VectorXd r(x.size()), r_pert(x.size()), x_pert(x.size());
  residual(x, r);
  const double r0 = r.norm();
  double rnorm = r0;
  if (r0 <= opts.abs_tol) {
    rep.converged = true;
    return rep;
  }
  const double eps = std::sqrt(std::numeric_limits<double>::epsilon());
  while (rep.newton_iterations < opts.max_newton) {
    const VectorXd x0 = x, r_base = r;
    LinearOperator jac;
    jac.size = x.size();
    jac.symmetric = false;
    jac.apply = [&](const VectorXd& v, VectorXd& out) {
      const double vn = v.norm();
      if (vn == 0.0) {
        out = VectorXd::Zero(v.size());
        return;
      }
      const double h = (opts.affine ? 1.0 : eps) * (1.0 + x0.norm()) / vn;
      x_pert = x0 + h * v;
      residual(x_pert, r_pert);
      out = (r_pert - r_base) / h;
    };
    VectorXd dx = VectorXd::Zero(x.size());
    const double lin_tol = opts.affine ? std::max(opts.tol * r0 / rnorm, 1e-14) : opts.linear_tol;
    const SolveReport lr = gmres_solve(jac, -r_base, dx, lin_tol, opts.max_linear, opts.restart, precond);
    rep.linear_iterations += lr.iterations;
    // backtracking on the residual norm
    double step = 1.0;
    for (int ls = 0;; ++ls) {
      x = x0 + step * dx;
      residual(x, r);
      if (opts.affine || r.norm() < rnorm || ls == 8) break;
      step *= 0.5;
    }
    rnorm = r.norm();
    ++rep.newton_iterations;
    rep.relative_residual = rnorm / r0;
    if (rnorm <= opts.tol * r0 || rnorm <= opts.abs_tol) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

BlockJacobi::BlockJacobi(const std::vector<Eigen::MatrixXd>& blocks,
                         std::vector<int> block_of_unit)
    : block_of_unit_(std::move(block_of_unit)) {
  if (blocks.empty()) throw std::invalid_argument("BlockJacobi: no blocks");
  bs_ = static_cast<int>(blocks.front().rows());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& m = blocks[i];
    if (m.rows() != bs_ || m.cols() != bs_)
      throw std::invalid_argument("BlockJacobi: blocks must be square and of equal size");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
      throw std::runtime_error("BlockJacobi: singular block " + std::to_string(i));
    inverses_.push_back(lu.inverse());
  }
  for (int b : block_of_unit_)
    if (b < 0 || b >= static_cast<int>(inverses_.size()))
      throw std::invalid_argument("BlockJacobi: block index out of range");
}

void BlockJacobi::apply(const VectorXd& in, VectorXd& out) const {
  out.resize(in.size());
  for (std::size_t u = 0; u < block_of_unit_.size(); ++u) {
    const Eigen::Index off = static_cast<Eigen::Index>(u) * bs_;
    out.segment(off, bs_).noalias() = inverses_[block_of_unit_[u]] * in.segment(off, bs_);
  }
}

VectorApply BlockJacobi::as_function() const {
  return [this](const VectorXd& in, VectorXd& out) { apply(in, out); };
}

}  // namespace dgflow
