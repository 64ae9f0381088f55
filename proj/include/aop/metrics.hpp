#pragma once

#include <vector>

#include <Eigen/Dense>

#include "aop/basis.hpp"
#include "aop/prior.hpp"

namespace aop {

inline constexpr double kDefaultEpsilon = 0.1;

struct MetricReport {
  int nc = 0;
  double og = 0.0;
  Eigen::MatrixXd ip_matrix;  // K x K
  std::vector<double> norms;  // squared function norms, diag(ip_matrix)
};

/// Number of components whose squared function norm strictly exceeds epsilon.
int effective_components(const CoefficientSet& coef_means, const GramMatrix& gram, double epsilon = kDefaultEpsilon);

/// Sum over unordered pairs j < k of |beta_j^T Omega beta_k|.
double orthogonality_measure(const CoefficientSet& coef_means, const GramMatrix& gram);

/// Entry (j, k) = beta_j^T Omega beta_k.
Eigen::MatrixXd inner_product_matrix(const CoefficientSet& coef_means, const GramMatrix& gram);

MetricReport compute_metrics(const CoefficientSet& coef_means, const GramMatrix& gram,
                             double epsilon = kDefaultEpsilon);

}  // namespace aop
