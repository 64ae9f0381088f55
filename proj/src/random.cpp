#include "aop/random.hpp"

#include <cmath>

#include "aop/error.hpp"

namespace aop {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

template <typename Factor>
Factor factor_with_jitter(const Eigen::MatrixXd& m, const char* what) {
  Factor llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * std::abs(m.trace()) / static_cast<double>(m.rows());
  Eigen::MatrixXd bumped = m;
  bumped.diagonal().array() += jitter > 0.0 ? jitter : 1e-10;
  llt.compute(bumped);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string("cholesky factorization of ") + what + " failed after jitter");
  }
  return llt;
}

}  // namespace

double Rng::gamma(double shape, double rate) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
}

double Rng::inv_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
  return z;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t c : coords) h = splitmix64(h ^ splitmix64(c + 0x632BE59BD9B4E019ULL));
  return h;
}

Eigen::VectorXd sample_mvn_cov(Rng& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const auto llt = factor_with_jitter<Eigen::LLT<Eigen::MatrixXd>>(cov, "covariance");
  return mean + llt.matrixL() * rng.normal_vector(mean.size());
}

Eigen::VectorXd sample_mvn_precision(Rng& rng, const Eigen::MatrixXd& precision, const Eigen::VectorXd& shift) {
  const auto llt = factor_with_jitter<Eigen::LLT<Eigen::MatrixXd>>(precision, "precision");
  Eigen::VectorXd mean = llt.solve(shift);
  // precision = U^T U, so U^{-1} z has covariance precision^{-1}.
  Eigen::VectorXd z = rng.normal_vector(shift.size());
  return mean + llt.matrixU().solve(z);
}

}  // namespace aop
