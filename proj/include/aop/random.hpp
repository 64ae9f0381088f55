#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace aop {

/// Random stream owned by a single chain. Not thread-safe; give each chain its own.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  /// Gamma with the given shape and rate (mean shape / rate).
  double gamma(double shape, double rate);

  /// Inverse-gamma IG(shape, scale) with density proportional to x^{-shape-1} exp(-scale / x).
  double inv_gamma(double shape, double scale);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Mixes a master seed with a list of stream coordinates (splitmix64 chain).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords);

/// Draw from N(mean, cov). On Cholesky failure adds 1e-10 * trace / dim to the
/// diagonal and retries once; throws NumericalError if that also fails.
Eigen::VectorXd sample_mvn_cov(Rng& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

/// Draw from N(precision^{-1} shift, precision^{-1}) with the same jitter policy.
Eigen::VectorXd sample_mvn_precision(Rng& rng, const Eigen::MatrixXd& precision, const Eigen::VectorXd& shift);

}  // namespace aop
