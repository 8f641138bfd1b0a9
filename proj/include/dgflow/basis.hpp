#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dgflow {

struct QuadratureRule1D {
  std::vector<double> points;
  std::vector<double> weights;

  [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
  /// Affine image of a rule given on [-1,1] onto [a,b].
  [[nodiscard]] QuadratureRule1D mapped(double a, double b) const;
};

/// Gauss-Lobatto points of degree p (p+1 points) on [-1,1], sorted ascending.
std::vector<double> gll_nodes(int p);

/// n-point Gauss-Legendre rule on [-1,1].
QuadratureRule1D gauss_legendre(int n);

/// Legendre polynomial P_n and its derivative at x in [-1,1].
std::pair<double, double> legendre(int n, double x);

/// Shifted Legendre polynomial on [0,1], L_n(x) = P_n(2x-1), and its derivative.
std::pair<double, double> shifted_legendre(int n, double x);

/// Lagrange basis of degree p on the Gauss-Lobatto points of [0,1]; degree 0 is the constant.
class TensorBasis1D {
 public:
  explicit TensorBasis1D(int degree);

  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] int size() const { return degree_ + 1; }
  [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }

  [[nodiscard]] Eigen::VectorXd values(double x) const;
  [[nodiscard]] Eigen::VectorXd derivatives(double x) const;

  /// D(i,j) = derivative of basis j at node i.
  [[nodiscard]] Eigen::MatrixXd differentiation_matrix() const;

 private:
  int degree_;
  std::vector<double> nodes_;
  std::vector<double> bary_;
};

/// Basis tables of a TensorBasis1D on a quadrature rule over [0,1].
struct BasisTables {
  int degree = 0;
  int n_q = 0;
  Eigen::MatrixXd val;  // (n_q, p+1): basis i at point q
  Eigen::MatrixXd der;  // (n_q, p+1)
  std::vector<double> weights;
  std::vector<double> points;
  Eigen::VectorXd end_val[2];  // basis values at 0 and 1
  Eigen::VectorXd end_der[2];  // basis derivatives at 0 and 1

  BasisTables() = default;
  BasisTables(const TensorBasis1D& basis, const QuadratureRule1D& unit_rule);
};

/// Gauss-Legendre rule on [0,1].
QuadratureRule1D unit_gauss(int n);

/// Quadrature-point values of a scalar tensor-product polynomial on one cell.
/// Matrices are indexed (qx, qy).
struct CellQuadValues {
  Eigen::MatrixXd value, dx, dy;
};

/// Sum-factorized evaluation of a (p+1)x(p+1) coefficient block U(i,j) (i along x).
/// Cost O(p^3) per cell.
void eval_cell(const Eigen::Ref<const Eigen::MatrixXd>& coeffs, const BasisTables& t,
               double hx, double hy, CellQuadValues& out, bool gradients = true);

/// Values only.
void eval_cell_values(const Eigen::Ref<const Eigen::MatrixXd>& coeffs, const BasisTables& t,
                      Eigen::MatrixXd& out);

/// Accumulates into `coeffs` the test-function integrals
///   sum_q [ f phi + fx dphi/dx + fy dphi/dy ](q)
/// where the inputs already include quadrature weights and the Jacobian.
/// Any of the three inputs may be null.
void integrate_cell(const BasisTables& t, double hx, double hy, const Eigen::MatrixXd* f,
                    const Eigen::MatrixXd* fx, const Eigen::MatrixXd* fy,
                    Eigen::Ref<Eigen::MatrixXd> coeffs);

/// Trace of a coefficient block on the face of the given axis and side, evaluated at
/// the tangential quadrature points; `normal_derivative` is d/dx_axis (positive axis).
struct FaceQuadValues {
  Eigen::VectorXd value, normal_derivative;
};

void eval_face(const Eigen::Ref<const Eigen::MatrixXd>& coeffs, const BasisTables& t, int axis,
               int side, double h_axis, FaceQuadValues& out, bool derivative = true);

/// Accumulates sum_q [ f phi + g dphi/dx_axis ](q) over the face; inputs are weighted.
void integrate_face(const BasisTables& t, int axis, int side, double h_axis,
                    const Eigen::VectorXd* f, const Eigen::VectorXd* g,
                    Eigen::Ref<Eigen::MatrixXd> coeffs);

}  // namespace dgflow
