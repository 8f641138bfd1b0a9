#include <gtest/gtest.h>

#include <random>

#include "dgflow/forms.hpp"
#include "dgflow/krylov.hpp"
#include "../oracle/dense_oracle.hpp"

using namespace dgflow;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd random_vector(Eigen::Index n, std::mt19937& gen) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

LinearOperator dense_operator(const MatrixXd& A) {
  return {[A](const VectorXd& in, VectorXd& out) { out = A * in; }, A.rows(), true, false};
}

LinearOperator alpha_operator(const DGForms& forms) {
  LinearOperator op;
  op.size = forms.pressure_field().size();
  op.constant_null_space = true;
  op.apply = [&forms](const VectorXd& in, VectorXd& out) {
    DGField f = forms.pressure_field();
    f.coeffs = in;
    out = forms.apply_alpha(f).coeffs;
  };
  return op;
}

BlockJacobi alpha_block_jacobi(const DGForms& forms) {
  std::vector<MatrixXd> blocks;
  std::vector<int> idx;
  for (int c = 0; c < forms.mesh().n_cells(); ++c) {
    blocks.push_back(forms.alpha_cell_block(c));
    idx.push_back(c);
  }
  return BlockJacobi(blocks, idx);
}

}  // namespace

TEST(CG, ZeroRhsAndIdentity) {
  const LinearOperator id = dense_operator(MatrixXd::Identity(5, 5));
  VectorXd x = VectorXd::Ones(5);
  auto rep = cg_solve(id, VectorXd::Zero(5), x, 1e-12, 10);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_EQ(x.norm(), 0.0);
  std::mt19937 gen(1);
  const VectorXd b = random_vector(5, gen);
  x = VectorXd::Zero(5);
  rep = cg_solve(id, b, x, 1e-12, 10);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_LT((x - b).norm(), 1e-15);
}

TEST(CG, DetectsIndefiniteOperator) {
  MatrixXd A = MatrixXd::Identity(3, 3);
  A(1, 1) = -1.0;
  VectorXd x = VectorXd::Zero(3);
  const auto rep = cg_solve(dense_operator(A), VectorXd::Unit(3, 1), x, 1e-12, 10);
  EXPECT_FALSE(rep.converged);
  EXPECT_NE(rep.message.find("breakdown"), std::string::npos);
}

TEST(CG, NeumannPoissonMatchesPseudoInverse) {
  const StructuredMesh2D m(2, 2, {}, {false, false});
  const int p = 3;
  const DGForms forms(m, p, FormConfig{});
  const oracle::DenseOracle ref(2, 2, {0, 1, 0, 1}, {false, false}, p, 1.0, 3.0, {}, {});
  const MatrixXd A = ref.alpha_matrix();
  const MatrixXd pinv = A.completeOrthogonalDecomposition().pseudoInverse();
  std::mt19937 gen(5);
  for (int trial = 0; trial < 3; ++trial) {
    VectorXd b = random_vector(A.rows(), gen);
    b.array() -= b.mean();
    VectorXd x = VectorXd::Zero(b.size());
    const auto rep = cg_solve(alpha_operator(forms), b, x, 1e-13, 500);
    ASSERT_TRUE(rep.converged);
    EXPECT_LE(rep.relative_residual, 1e-13);
    EXPECT_LT((x - pinv * b).norm(), 1e-9 * (pinv * b).norm());
    EXPECT_NEAR(x.sum(), 0.0, 1e-12);
  }
}

TEST(CG, MeanZeroSolutionInL2Sense) {
  const StructuredMesh2D m(3, 3, {}, {true, true});
  const DGForms forms(m, 3, FormConfig{});
  std::mt19937 gen(6);
  DGField b = forms.pressure_field();
  b.coeffs = random_vector(b.size(), gen);
  DGField x = forms.pressure_field();
  cg_solve(alpha_operator(forms), b.coeffs, x.coeffs, 1e-12, 1000);
  forms.remove_mean(x);
  EXPECT_NEAR(forms.integrate(x), 0.0, 1e-12);
}

TEST(CG, BlockJacobiReducesIterations) {
  const StructuredMesh2D m(4, 4, {}, {false, false});
  const DGForms forms(m, 3, FormConfig{});
  const BlockJacobi bj = alpha_block_jacobi(forms);
  std::mt19937 gen(7);
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd b = random_vector(forms.pressure_field().size(), gen);
    VectorXd x1 = VectorXd::Zero(b.size()), x2 = VectorXd::Zero(b.size());
    const auto plain = cg_solve(alpha_operator(forms), b, x1, 1e-10, 2000);
    const auto pre = cg_solve(alpha_operator(forms), b, x2, 1e-10, 2000, bj.as_function());
    ASSERT_TRUE(plain.converged && pre.converged);
    EXPECT_LT(pre.iterations, plain.iterations);
  }
}

TEST(CG, DiagonalOperatorWithBlockJacobiConvergesInOneStep) {
  std::mt19937 gen(8);
  VectorXd d = random_vector(12, gen).cwiseAbs().array() + 0.5;
  const MatrixXd A = d.asDiagonal();
  std::vector<MatrixXd> blocks;
  for (int u = 0; u < 3; ++u) blocks.push_back(A.block(4 * u, 4 * u, 4, 4));
  const BlockJacobi bj(blocks, {0, 1, 2});
  VectorXd x = VectorXd::Zero(12);
  const auto rep = cg_solve(dense_operator(A), random_vector(12, gen), x, 1e-12, 10, bj.as_function());
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 1);
}

TEST(BlockJacobi, RejectsSingularBlock) {
  EXPECT_THROW(BlockJacobi({MatrixXd::Zero(3, 3)}, {0}), std::runtime_error);
  EXPECT_THROW(BlockJacobi({MatrixXd::Identity(3, 3)}, {1}), std::invalid_argument);
}

TEST(GMRES, NonsymmetricSystem) {
  std::mt19937 gen(9);
  MatrixXd A = MatrixXd::Identity(40, 40) * 4.0;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j) A(i, j) += 0.3 * random_vector(1, gen)[0];
  const VectorXd b = random_vector(40, gen);
  LinearOperator op = dense_operator(A);
  op.symmetric = false;
  for (int restart : {5, 50}) {
    VectorXd x = VectorXd::Zero(40);
    const auto rep = gmres_solve(op, b, x, 1e-12, 2000, restart);
    EXPECT_TRUE(rep.converged);
    EXPECT_LT((A * x - b).norm(), 1e-11 * b.norm());
  }
}

TEST(Operators, FormApplicationIsLinear) {
  const StructuredMesh2D m(3, 2, {}, {false, true});
  const DGForms forms(m, 2, FormConfig{});
  const LinearOperator op = alpha_operator(forms);
  std::mt19937 gen(10);
  const VectorXd x = random_vector(op.size, gen), y = random_vector(op.size, gen);
  VectorXd ax, ay, axy;
  op.apply(x, ax);
  op.apply(y, ay);
  op.apply(2.5 * x - 0.7 * y, axy);
  EXPECT_LT((axy - 2.5 * ax + 0.7 * ay).norm(), 1e-12 * axy.norm());
}

TEST(Newton, AffineResidualConvergesInOneStep) {
  std::mt19937 gen(11);
  MatrixXd A = MatrixXd::Identity(20, 20) * 3.0 + 0.1 * MatrixXd::Random(20, 20);
  const VectorXd b = random_vector(20, gen);
  VectorXd x = VectorXd::Zero(20);
  NewtonOptions opts;
  opts.affine = true;
  const auto rep = newton_krylov_solve([&](const VectorXd& v, VectorXd& r) { r = A * v - b; }, x, opts);
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.newton_iterations, 1);
  EXPECT_LT((A * x - b).norm(), 1e-9 * b.norm());
}

TEST(Newton, ZeroResidualKeepsGuess) {
  VectorXd x = VectorXd::Constant(4, 2.0);
  const auto rep = newton_krylov_solve(
      [](const VectorXd& v, VectorXd& r) { r = v.array() - 2.0; }, x, NewtonOptions{});
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.newton_iterations, 0);
  EXPECT_EQ(x, VectorXd::Constant(4, 2.0));
}

TEST(Newton, ConvectiveStageMatchesDenseNewton) {
  // F(v) = M v + tau (A v + C(v)) - rhs on a 2x2 mesh with p = 2
  const StructuredMesh2D m(2, 2, {}, {false, false});
  FormConfig cfg;
  cfg.mu = 0.05;
  cfg.dirichlet = [](double x, double y, double) { return Vec2{y * (1 - y), 0.2 * x}; };
  const DGForms forms(m, 2, cfg);
  const double tau = 0.1;
  std::mt19937 gen(12);
  DGField vref = forms.velocity_field();
  vref.coeffs = random_vector(vref.size(), gen);
  const VectorXd rhs = forms.apply_mass(vref).coeffs;
  auto F = [&](const VectorXd& v, VectorXd& r) {
    DGField f = forms.velocity_field();
    f.coeffs = v;
    r = forms.apply_mass(f).coeffs + tau * (forms.apply_a(f).coeffs + forms.apply_c(f, 0.0).coeffs) - rhs;
  };
  // dense Newton with a central-difference Jacobian and LU solves
  VectorXd xd = VectorXd::Zero(rhs.size()), r(rhs.size()), rp, rm;
  for (int it = 0; it < 30; ++it) {
    F(xd, r);
    if (r.norm() < 1e-14) break;
    MatrixXd J(rhs.size(), rhs.size());
    for (Eigen::Index j = 0; j < rhs.size(); ++j) {
      VectorXd e = VectorXd::Zero(rhs.size());
      e[j] = 1e-6;
      F(xd + e, rp);
      F(xd - e, rm);
      J.col(j) = (rp - rm) / 2e-6;
    }
    xd -= J.partialPivLu().solve(r);
  }
  VectorXd x = VectorXd::Zero(rhs.size());
  NewtonOptions opts;
  opts.tol = 1e-12;
  const auto rep = newton_krylov_solve(F, x, opts);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT((x - xd).norm(), 1e-8 * xd.norm());
}
