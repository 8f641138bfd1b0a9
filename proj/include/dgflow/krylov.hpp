#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace dgflow {

using VectorApply = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

/// Matrix-free linear operator acting on coefficient vectors.
struct LinearOperator {
  VectorApply apply;
  Eigen::Index size = 0;
  bool symmetric = true;
  /// Kernel spanned by the all-ones coefficient vector (nodal constants).
  bool constant_null_space = false;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::string message;
};

/// Preconditioned conjugate gradients. `x` holds the initial guess on entry. Convergence
/// is measured as ||r|| <= tol * ||b||. With a constant null space, b and every
/// iterate are projected onto the orthogonal complement of the ones vector.
SolveReport cg_solve(const LinearOperator& op, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                     double tol, int max_it, const VectorApply& precond = {});

/// Restarted GMRES with right preconditioning; `x` holds the initial guess on entry.
SolveReport gmres_solve(const LinearOperator& op, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                        double tol, int max_it, int restart = 50, const VectorApply& precond = {});

struct NewtonOptions {
  double tol = 1e-9;          // relative to the initial residual norm
  double abs_tol = 0.0;       // also accept ||F|| <= abs_tol
  double linear_tol = 1e-4;   // inexact Newton forcing term
  int max_newton = 20;
  int max_linear = 500;
  int restart = 60;
  /// Residual is affine in the unknown: one exact linear solve suffices and the
  /// Jacobian action is a plain difference.
  bool affine = false;
};

struct NewtonReport {
  int newton_iterations = 0;
  int linear_iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using ResidualFunction = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;

/// Jacobian-free Newton-GMRES for F(x) = 0; Jacobian actions by forward differences.
NewtonReport newton_krylov_solve(const ResidualFunction& residual, Eigen::VectorXd& x,
                                 const NewtonOptions& opts, const VectorApply& precond = {});

/// Exact inverse of a block-diagonal operator with contiguous equally sized blocks.
/// Blocks that repeat (uniform meshes) are factorized once and shared.
class BlockJacobi {
 public:
  /// block_of_unit[u] selects the matrix used for the u-th contiguous block.
  BlockJacobi(const std::vector<Eigen::MatrixXd>& blocks, std::vector<int> block_of_unit);

  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  [[nodiscard]] VectorApply as_function() const;
  [[nodiscard]] int block_size() const { return bs_; }

 private:
  int bs_ = 0;
  std::vector<Eigen::MatrixXd> inverses_;
  std::vector<int> block_of_unit_;
};

}  // namespace dgflow
