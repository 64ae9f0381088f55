#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace aop {

enum class BasisKind {
  CubicBsplineIntercept,  ///< constant 1 followed by L-1 cubic B-splines
  OrthonormalTest,        ///< normalized Legendre polynomials, Gram matrix = I (testing only)
};

struct Domain {
  double lower = 0.0;
  double upper = 1.0;

  bool contains(double t) const { return t >= lower && t <= upper; }
  double length() const { return upper - lower; }
};

struct BasisSpec {
  BasisKind kind = BasisKind::CubicBsplineIntercept;
  int size = 12;  // L
  Domain domain{};

  void validate() const;
};

/// Gram matrix Omega = \int Phi(t) Phi(t)^T dt.
struct GramMatrix {
  Eigen::MatrixXd omega;

  int size() const { return static_cast<int>(omega.rows()); }
  bool is_identity() const { return omega.isIdentity(0.0); }
  static GramMatrix identity(int n) { return {Eigen::MatrixXd::Identity(n, n)}; }
};

/// Immutable basis evaluator with its Gram matrix. Safe to share between threads.
class BasisSystem {
 public:
  const BasisSpec& spec() const { return spec_; }
  int size() const { return spec_.size; }
  const Domain& domain() const { return spec_.domain; }
  /// Full clamped knot vector (boundary knots repeated four times). Empty for the test kind.
  const std::vector<double>& knots() const { return knots_; }
  const GramMatrix& gram() const { return gram_; }

  /// phi_1(t) .. phi_L(t); throws DomainError outside the domain.
  Eigen::VectorXd evaluate(double t) const;
  /// Design matrix with one row per point.
  Eigen::MatrixXd evaluate(std::span<const double> ts) const;

  friend BasisSystem build_basis(const BasisSpec& spec, int quadrature_points);

 private:
  void evaluate_into(double t, Eigen::Ref<Eigen::VectorXd> out) const;

  BasisSpec spec_;
  std::vector<double> knots_;
  GramMatrix gram_;
};

/// Builds the basis with equally spaced internal knots and the Gram matrix by
/// composite Gauss-Legendre quadrature. quadrature_points <= 0 selects 10 * L.
BasisSystem build_basis(const BasisSpec& spec, int quadrature_points = 0);

/// Values of the n cubic B-splines (n = knots.size() - 4) at t. Public for testing.
Eigen::VectorXd cubic_bspline_values(const std::vector<double>& knots, double t);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n);

double inner_product(const Eigen::VectorXd& beta_j, const Eigen::VectorXd& beta_k, const GramMatrix& gram);

/// beta^T Omega beta, with round-off negatives above -1e-10 clamped to zero.
double function_norm_sq(const Eigen::VectorXd& beta, const GramMatrix& gram);

}  // namespace aop
