#include "aop/prior.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "aop/error.hpp"

namespace aop {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// Throws if A is too ill-conditioned to invert; `level` is the index of the drawn vector.
void check_conditioning(const Eigen::MatrixXd& a, int level) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || !(smax / smin < kMaxConstraintCondition)) {
    throw DegenerateConstraintError(level, "condition number of A exceeds 1e12 (sigma_min = " +
                                               std::to_string(smin) + ")");
  }
}

void check_tau(double tau_sq) {
  if (!(tau_sq > 0.0) || !std::isfinite(tau_sq)) {
    throw ConfigError("tau^2 must be positive and finite, got " + std::to_string(tau_sq));
  }
}

}  // namespace

AopConfig AopConfig::with_defaults(int K, int L, TauMode mode) {
  AopConfig c;
  c.K = K;
  c.L = L;
  c.tau_mode = mode;
  c.b0 = 2.0 / (static_cast<double>(K) * K);
  return c;
}

void AopConfig::validate() const {
  if (K < 1 || K > L) {
    throw ConfigError("need 1 <= K <= L, got K=" + std::to_string(K) + " L=" + std::to_string(L));
  }
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw ConfigError("a0 and b0 must be > 0");
  if (tau_mode == TauMode::Fixed) {
    if (K > 1 && fixed_tau.size() != static_cast<std::size_t>(K - 1) && fixed_tau.size() != 1) {
      throw ConfigError("fixed tau mode needs K-1 values");
    }
    for (double t : fixed_tau) check_tau(t);
  }
}

ConstraintMatrix build_h_matrix(int L, int j) {
  if (j < 1 || j >= L) {
    throw ConfigError("H matrix level requires 1 <= j < L, got j=" + std::to_string(j) + " L=" + std::to_string(L));
  }
  return {Eigen::MatrixXd::Identity(L, L).bottomRows(L - j)};
}

Eigen::MatrixXd constraint_stack(const Eigen::MatrixXd& prefix, const GramMatrix& gram, const ConstraintMatrix& h) {
  const Eigen::Index L = gram.omega.rows();
  const Eigen::Index j = prefix.rows();
  if (prefix.cols() != L || h.h.cols() != L || h.h.rows() != L - j) {
    throw DimensionError("constraint stack: prefix " + std::to_string(j) + "x" + std::to_string(prefix.cols()) +
                         ", H " + std::to_string(h.h.rows()) + "x" + std::to_string(h.h.cols()) + ", L=" +
                         std::to_string(L));
  }
  Eigen::MatrixXd a(L, L);
  a.topRows(j) = prefix * gram.omega;
  a.bottomRows(L - j) = h.h;
  return a;
}

GaussianParams conditional_prior_params(const Eigen::MatrixXd& prefix, const GramMatrix& gram, double tau_sq,
                                        const ConstraintMatrix& h, double gamma) {
  check_tau(tau_sq);
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  const Eigen::MatrixXd a = constraint_stack(prefix, gram, h);
  const Eigen::Index L = a.rows();
  const Eigen::Index j = prefix.rows();
  check_conditioning(a, static_cast<int>(j) + 1);

  Eigen::VectorXd d(L);
  d.head(j).setConstant(tau_sq);
  d.tail(L - j).setConstant(gamma);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  // A^{-1} D^{1/2}, so cov = S S^T is PSD by construction.
  const Eigen::MatrixXd s = lu.solve(Eigen::MatrixXd(d.cwiseSqrt().asDiagonal()));
  GaussianParams out;
  out.mean = Eigen::VectorXd::Zero(L);  // b* = 0 under the zero-mean hyperprior
  out.cov = s * s.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

std::vector<double> expand_tau(std::span<const double> tau_values, int K) {
  if (K <= 1) return {};
  if (tau_values.size() == 1) return std::vector<double>(static_cast<std::size_t>(K - 1), tau_values[0]);
  if (tau_values.size() != static_cast<std::size_t>(K - 1)) {
    throw DimensionError("expected K-1 = " + std::to_string(K - 1) + " tau values, got " +
                         std::to_string(tau_values.size()));
  }
  return {tau_values.begin(), tau_values.end()};
}

CoefficientSet sample_sequential_prior(const AopConfig& config, const GramMatrix& gram,
                                       std::span<const double> tau_values, Rng& rng) {
  config.validate();
  if (gram.size() != config.L) throw DimensionError("Gram matrix size does not match L");
  const auto taus = expand_tau(tau_values, config.K);

  CoefficientSet out;
  out.betas.resize(config.K, config.L);
  out.betas.row(0) = std::sqrt(config.gamma) * rng.normal_vector(config.L).transpose();
  for (int j = 1; j < config.K; ++j) {
    const auto params = conditional_prior_params(out.betas.topRows(j), gram, taus[static_cast<std::size_t>(j - 1)],
                                                 build_h_matrix(config.L, j), config.gamma);
    out.betas.row(j) = sample_mvn_cov(rng, params.mean, params.cov).transpose();
  }
  return out;
}

CoefficientSet sample_sequential_prior(const AopConfig& config, const GramMatrix& gram,
                                       std::span<const double> tau_values, std::uint64_t seed) {
  Rng rng(seed);
  return sample_sequential_prior(config, gram, tau_values, rng);
}

double log_joint_prior_density(const CoefficientSet& betas, std::span<const double> tau_values,
                               const GramMatrix& gram, const AopConfig& config) {
  config.validate();
  const int K = betas.count();
  const int L = betas.basis_size();
  if (K != config.K || L != config.L || gram.size() != L) {
    throw DimensionError("log_joint_prior_density: coefficient shape does not match configuration");
  }
  const auto taus = expand_tau(tau_values, K);
  for (double t : taus) check_tau(t);

  const double g = config.gamma;
  double logp = -0.5 * L * (kLog2Pi + std::log(g)) - 0.5 * betas.betas.row(0).squaredNorm() / g;
  for (int j = 1; j < K; ++j) {
    const double tau_sq = taus[static_cast<std::size_t>(j - 1)];
    const Eigen::MatrixXd a = constraint_stack(betas.betas.topRows(j), gram, build_h_matrix(L, j));
    check_conditioning(a, j + 1);
    const Eigen::VectorXd r = a * betas.beta(j);
    const double log_det = Eigen::PartialPivLU<Eigen::MatrixXd>(a).matrixLU().diagonal().array().abs().log().sum();
    logp += -0.5 * r.head(j).squaredNorm() / tau_sq - 0.5 * j * (kLog2Pi + std::log(tau_sq));
    logp += -0.5 * r.tail(L - j).squaredNorm() / g - 0.5 * (L - j) * (kLog2Pi + std::log(g));
    logp += log_det;
  }
  return logp;
}

double conditional_trace_variance(const Eigen::MatrixXd& prefix, double tau_sq, double gamma,
                                  const ConstraintMatrix& h, const GramMatrix& gram) {
  if (!gram.omega.isIdentity(1e-12)) {
    throw ConfigError("conditional_trace_variance requires an orthonormal basis (Omega = I)");
  }
  check_tau(tau_sq);
  const Eigen::Index L = gram.omega.rows();
  const Eigen::Index j = prefix.rows();
  if (h.h.rows() != L - j || h.h.cols() != L || prefix.cols() != L) {
    throw DimensionError("conditional_trace_variance: inconsistent shapes");
  }
  const Eigen::MatrixXd b = prefix.transpose();  // L x j
  const Eigen::MatrixXd p = Eigen::MatrixXd::Identity(L, L) - h.h.transpose() * h.h;
  const Eigen::MatrixXd inner = b.transpose() * p * b;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(inner);
  if (!lu.isInvertible() || lu.rcond() < 1.0 / kMaxConstraintCondition) {
    throw DegenerateConstraintError(static_cast<int>(j) + 1, "B^T P B is singular");
  }
  const Eigen::MatrixXd inv = lu.inverse();
  // I - P = H^T H is the projection onto the row space of H.
  const Eigen::MatrixXd hb = h.h * b;
  return tau_sq * inv.trace() + gamma * static_cast<double>(L - j) + gamma * (inv * hb.transpose() * hb).trace();
}

std::vector<double> figure1_density_grid(const Eigen::Vector2d& beta1, double tau_sq, double b02,
                                         std::span<const Eigen::Vector2d> points) {
  const GramMatrix gram = GramMatrix::identity(2);
  const auto params =
      conditional_prior_params(beta1.transpose(), gram, tau_sq, build_h_matrix(2, 1), b02);
  const Eigen::LLT<Eigen::MatrixXd> llt(params.cov);
  if (llt.info() != Eigen::Success) throw NumericalError("conditional covariance is not positive definite");
  const double log_norm =
      -kLog2Pi - Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const Eigen::VectorXd z = llt.matrixL().solve(Eigen::VectorXd(p - params.mean));
    out.push_back(std::exp(log_norm - 0.5 * z.squaredNorm()));
  }
  return out;
}

}  // namespace aop
