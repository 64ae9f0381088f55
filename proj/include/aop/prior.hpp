#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aop/basis.hpp"
#include "aop/random.hpp"

namespace aop {

enum class TauMode { Fixed, Global, Local };

/// Hyperparameters of the sequential orthogonal prior. b_{0j} is always zero and
/// B_{0j} = gamma * I.
struct AopConfig {
  int K = 1;
  int L = 1;
  double gamma = 1.0;
  TauMode tau_mode = TauMode::Fixed;
  std::vector<double> fixed_tau;  // tau_2^2 .. tau_K^2 when tau_mode == Fixed
  double a0 = 3.0;
  double b0 = 2.0;

  /// Defaults a0 = 3, b0 = 2 / K^2 (prior mean of tau^2 is 1 / K^2).
  static AopConfig with_defaults(int K, int L, TauMode mode = TauMode::Global);
  void validate() const;
};

/// Rows are beta_1 .. beta_K.
struct CoefficientSet {
  Eigen::MatrixXd betas;

  int count() const { return static_cast<int>(betas.rows()); }
  int basis_size() const { return static_cast<int>(betas.cols()); }
  Eigen::VectorXd beta(int k) const { return betas.row(k).transpose(); }
};

/// H_{j+1}: (L - j) x L with orthonormal rows.
struct ConstraintMatrix {
  Eigen::MatrixXd h;
};

struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Condition-number ceiling on A_{j+1} before a DegenerateConstraintError is raised.
inline constexpr double kMaxConstraintCondition = 1e12;

/// Last L - j rows of I_L.
ConstraintMatrix build_h_matrix(int L, int j);

/// A_{j+1} = [beta_1^T Omega; ...; beta_j^T Omega; H_{j+1}]. prefix holds beta_1..beta_j as rows.
Eigen::MatrixXd constraint_stack(const Eigen::MatrixXd& prefix, const GramMatrix& gram, const ConstraintMatrix& h);

/// Conditional Gaussian of beta_{j+1} given beta_{1:j}:
///   mean = A^{-1} b*,  cov = A^{-1} blockdiag(tau^2 I_j, gamma I_{L-j}) A^{-T}.
GaussianParams conditional_prior_params(const Eigen::MatrixXd& prefix, const GramMatrix& gram, double tau_sq,
                                        const ConstraintMatrix& h, double gamma);

/// Expands tau values to one entry per level 2..K. Accepts K-1 values, or a single
/// value broadcast to every level.
std::vector<double> expand_tau(std::span<const double> tau_values, int K);

CoefficientSet sample_sequential_prior(const AopConfig& config, const GramMatrix& gram,
                                       std::span<const double> tau_values, Rng& rng);
CoefficientSet sample_sequential_prior(const AopConfig& config, const GramMatrix& gram,
                                       std::span<const double> tau_values, std::uint64_t seed);

/// Normalized log density of the sequential prior over beta-space, including the
/// log|det A_{j+1}| change-of-variables terms.
double log_joint_prior_density(const CoefficientSet& betas, std::span<const double> tau_values,
                               const GramMatrix& gram, const AopConfig& config);

/// Closed form of tr Var(beta_{j+1} | beta_{1:j}) for an orthonormal basis (Omega = I)
/// and orthonormal H.
double conditional_trace_variance(const Eigen::MatrixXd& prefix, double tau_sq, double gamma,
                                  const ConstraintMatrix& h, const GramMatrix& gram);

/// Conditional density of beta_2 given beta_1 in the two-dimensional orthonormal
/// setting, evaluated at each lattice point. b02 is the variance of H_2 beta_2.
std::vector<double> figure1_density_grid(const Eigen::Vector2d& beta1, double tau_sq, double b02,
                                         std::span<const Eigen::Vector2d> points);

}  // namespace aop
