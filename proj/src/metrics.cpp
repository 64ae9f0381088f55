#include "aop/metrics.hpp"

#include <cmath>

#include "aop/error.hpp"

namespace aop {

namespace {

void check_shape(const CoefficientSet& c, const GramMatrix& gram) {
  if (c.basis_size() != gram.size()) {
    throw DimensionError("coefficient length " + std::to_string(c.basis_size()) + " does not match Gram size " +
                         std::to_string(gram.size()));
  }
}

}  // namespace

Eigen::MatrixXd inner_product_matrix(const CoefficientSet& coef_means, const GramMatrix& gram) {
  check_shape(coef_means, gram);
  Eigen::MatrixXd ip = coef_means.betas * gram.omega * coef_means.betas.transpose();
  ip = (0.5 * (ip + ip.transpose())).eval();
  for (Eigen::Index k = 0; k < ip.rows(); ++k) {
    if (ip(k, k) < 0.0 && ip(k, k) > -1e-10) ip(k, k) = 0.0;
  }
  return ip;
}

int effective_components(const CoefficientSet& coef_means, const GramMatrix& gram, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  check_shape(coef_means, gram);
  int nc = 0;
  for (int k = 0; k < coef_means.count(); ++k) {
    if (function_norm_sq(coef_means.beta(k), gram) > epsilon) ++nc;
  }
  return nc;
}

double orthogonality_measure(const CoefficientSet& coef_means, const GramMatrix& gram) {
  const Eigen::MatrixXd ip = inner_product_matrix(coef_means, gram);
  double og = 0.0;
  for (Eigen::Index k = 1; k < ip.rows(); ++k) {
    for (Eigen::Index j = 0; j < k; ++j) og += std::abs(ip(j, k));
  }
  return og;
}

MetricReport compute_metrics(const CoefficientSet& coef_means, const GramMatrix& gram, double epsilon) {
  MetricReport r;
  r.ip_matrix = inner_product_matrix(coef_means, gram);
  r.nc = effective_components(coef_means, gram, epsilon);
  r.og = orthogonality_measure(coef_means, gram);
  for (Eigen::Index k = 0; k < r.ip_matrix.rows(); ++k) r.norms.push_back(r.ip_matrix(k, k));
  return r;
}

}  // namespace aop
