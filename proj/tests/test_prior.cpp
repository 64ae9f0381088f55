#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aop/basis.hpp"
#include "aop/error.hpp"
#include "aop/prior.hpp"
#include "oracles.hpp"

using namespace aop;

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd d = x - mu;
  const double quad = d.dot(ldlt.solve(d));
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * (x.size() * kLog2Pi + logdet + quad);
}

// Rows are j orthonormal vectors (Omega = I).
Eigen::MatrixXd orthonormal_prefix(int j, int L, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(L, L);
  for (int r = 0; r < L; ++r)
    for (int c = 0; c < L; ++c) m(r, c) = nd(gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ();
  return q.leftCols(j).transpose();
}

Eigen::MatrixXd random_prefix(int j, int L, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(j, L);
  for (int r = 0; r < j; ++r)
    for (int c = 0; c < L; ++c) m(r, c) = nd(gen);
  return m;
}

}  // namespace

TEST(HMatrix, OrthonormalRowsOfIdentity) {
  for (int L : {2, 5, 12})
    for (int j = 1; j < L; ++j) {
      auto h = build_h_matrix(L, j).h;
      ASSERT_EQ(h.rows(), L - j);
      ASSERT_EQ(h.cols(), L);
      EXPECT_TRUE((h * h.transpose()).isIdentity(0.0));
      EXPECT_EQ(h(0, j), 1.0);
    }
  EXPECT_THROW(build_h_matrix(4, 0), ConfigError);
  EXPECT_THROW(build_h_matrix(4, 4), ConfigError);
}

TEST(ConditionalPrior, CovarianceSymmetricPsd) {
  auto sys = build_basis({BasisKind::CubicBsplineIntercept, 12, {0.0, 1.0}});
  std::mt19937_64 gen(1);
  for (int j = 1; j < 10; ++j) {
    auto p = conditional_prior_params(random_prefix(j, 12, gen), sys.gram(), 0.05, build_h_matrix(12, j), 1.0);
    EXPECT_LE((p.cov - p.cov.transpose()).cwiseAbs().maxCoeff(), 1e-10 * p.cov.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.cov);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * p.cov.norm());
    EXPECT_EQ(p.mean, Eigen::VectorXd::Zero(12));
  }
}

TEST(ConditionalPrior, ConstraintCovarianceIsBlockDiagonal) {
  auto sys = build_basis({BasisKind::CubicBsplineIntercept, 8, {0.0, 2.0}});
  std::mt19937_64 gen(17);
  const int j = 3;
  auto prefix = random_prefix(j, 8, gen);
  auto h = build_h_matrix(8, j);
  auto p = conditional_prior_params(prefix, sys.gram(), 0.3, h, 2.0);
  Eigen::MatrixXd a = constraint_stack(prefix, sys.gram(), h);
  Eigen::MatrixXd v = a * p.cov * a.transpose();
  Eigen::VectorXd want(8);
  want << 0.3, 0.3, 0.3, 2, 2, 2, 2, 2;
  EXPECT_LT((v - Eigen::MatrixXd(want.asDiagonal())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ConditionalPrior, MonteCarloConstraintVariance) {
  auto sys = build_basis({BasisKind::CubicBsplineIntercept, 6, {0.0, 1.0}});
  std::mt19937_64 gen(23);
  Rng rng(99);
  const double tau_sq = 0.2;
  auto prefix = random_prefix(2, 6, gen);
  auto p = conditional_prior_params(prefix, sys.gram(), tau_sq, build_h_matrix(6, 2), 1.0);
  const int draws = 40000;
  std::vector<std::vector<double>> ips(2);
  for (int d = 0; d < draws; ++d) {
    Eigen::VectorXd b = sample_mvn_cov(rng, p.mean, p.cov);
    for (int k = 0; k < 2; ++k) ips[k].push_back(inner_product(prefix.row(k).transpose(), b, sys.gram()));
  }
  for (int k = 0; k < 2; ++k) {
    auto m = oracle::moments(ips[k]);
    const double se = std::sqrt((m.m4 - m.var * m.var) / draws);
    EXPECT_LT(std::abs(m.var - tau_sq), 3 * se) << "k=" << k;
  }
}

TEST(ConditionalPrior, DegeneratePrefixThrows) {
  auto id = GramMatrix::identity(2);
  Eigen::MatrixXd prefix(1, 2);
  prefix << 0.0, 1.0;  // A = [[0, 1], [0, 1]]
  try {
    conditional_prior_params(prefix, id, 0.1, build_h_matrix(2, 1), 1.0);
    FAIL() << "expected DegenerateConstraintError";
  } catch (const DegenerateConstraintError& e) {
    EXPECT_EQ(e.level(), 2);
  }
  EXPECT_THROW(conditional_prior_params(Eigen::MatrixXd::Ones(1, 2), id, 0.0, build_h_matrix(2, 1), 1.0),
               ConfigError);
}

TEST(TraceVariance, MatchesCovarianceTrace) {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<int> ld(3, 9);
  std::uniform_real_distribution<double> ud(0.01, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    const int L = ld(gen);
    const int j = std::uniform_int_distribution<int>(1, L - 1)(gen);
    auto prefix = random_prefix(j, L, gen);
    const double tau = ud(gen), gamma = ud(gen);
    auto id = GramMatrix::identity(L);
    auto h = build_h_matrix(L, j);
    const double closed = conditional_trace_variance(prefix, tau, gamma, h, id);
    const double direct = conditional_prior_params(prefix, id, tau, h, gamma).cov.trace();
    EXPECT_NEAR(closed, direct, 1e-8 * std::max(1.0, std::abs(direct)));
  }
}

TEST(TraceVariance, IncreasingInTau) {
  std::mt19937_64 gen(37);
  auto id = GramMatrix::identity(6);
  for (int j = 1; j < 6; ++j) {
    auto prefix = random_prefix(j, 6, gen);
    double prev = conditional_trace_variance(prefix, 1e-3, 1.0, build_h_matrix(6, j), id);
    for (double tau : {2e-3, 0.01, 0.1, 1.0, 10.0}) {
      double v = conditional_trace_variance(prefix, tau, 1.0, build_h_matrix(6, j), id);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(TraceVariance, AlignedPrefixesGiveClosedForm) {
  // prefix inside the complement of H's row space: tr = j tau^2 + (L - j) gamma
  std::mt19937_64 gen(41);
  const int L = 7;
  auto id = GramMatrix::identity(L);
  for (int rep = 0; rep < 10; ++rep) {
    double prev = INFINITY;
    for (int j = 1; j < L; ++j) {
      Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(j, L);
      prefix.leftCols(j) = orthonormal_prefix(j, j, gen);
      const double v = conditional_trace_variance(prefix, 0.1, 1.0, build_h_matrix(L, j), id);
      EXPECT_NEAR(v, 0.1 * j + 1.0 * (L - j), 1e-10);
      EXPECT_LT(v, prev);
      prev = v;
    }
  }
}

TEST(TraceVariance, LevelMonotonicityIsNotGeneral) {
  // a random orthonormal prefix whose leading block is nearly singular inflates the trace
  std::mt19937_64 gen(41);
  auto id = GramMatrix::identity(7);
  int increases = 0;
  for (int rep = 0; rep < 20; ++rep) {
    auto full = orthonormal_prefix(6, 7, gen);
    double prev = conditional_trace_variance(full.topRows(1), 0.1, 1.0, build_h_matrix(7, 1), id);
    for (int j = 2; j < 7; ++j) {
      double v = conditional_trace_variance(full.topRows(j), 0.1, 1.0, build_h_matrix(7, j), id);
      increases += v > prev;
      prev = v;
    }
  }
  EXPECT_GT(increases, 0);
}

TEST(TraceVariance, Preconditions) {
  auto sys = build_basis({BasisKind::CubicBsplineIntercept, 6, {0.0, 1.0}});
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Ones(1, 6);
  EXPECT_THROW(conditional_trace_variance(prefix, 0.1, 1.0, build_h_matrix(6, 1), sys.gram()), ConfigError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 6);
  bad(0, 3) = 1.0;  // inside the row space of H, so B^T P B = 0
  EXPECT_THROW(conditional_trace_variance(bad, 0.1, 1.0, build_h_matrix(6, 1), GramMatrix::identity(6)),
               DegenerateConstraintError);
}

TEST(LogDensity, SingleVectorIsIsotropicNormal) {
  auto cfg = AopConfig::with_defaults(1, 4);
  cfg.gamma = 2.5;
  CoefficientSet c;
  c.betas.resize(1, 4);
  c.betas << 0.3, -1.0, 2.0, 0.1;
  auto sys = build_basis({BasisKind::OrthonormalTest, 4, {0.0, 1.0}});
  const double want = mvn_logpdf(c.beta(0), Eigen::VectorXd::Zero(4), 2.5 * Eigen::MatrixXd::Identity(4, 4));
  EXPECT_NEAR(log_joint_prior_density(c, {}, sys.gram(), cfg), want, 1e-12);
}

TEST(LogDensity, TwoByTwoMatchesDirectGaussian) {
  auto id = GramMatrix::identity(2);
  auto cfg = AopConfig::with_defaults(2, 2, TauMode::Fixed);
  cfg.gamma = 0.7;
  std::mt19937_64 gen(43);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    const double tau = 0.05 + std::abs(nd(gen));
    cfg.fixed_tau = {tau};
    Eigen::Vector2d b1(nd(gen), nd(gen)), b2(nd(gen), nd(gen));
    Eigen::Matrix2d a;
    a << b1[0], b1[1], 0.0, 1.0;
    Eigen::Matrix2d d = Eigen::Vector2d(tau, cfg.gamma).asDiagonal();
    Eigen::Matrix2d cov = a.inverse() * d * a.inverse().transpose();
    const double want = mvn_logpdf(b1, Eigen::Vector2d::Zero(), cfg.gamma * Eigen::Matrix2d::Identity()) +
                        mvn_logpdf(b2, Eigen::Vector2d::Zero(), cov);
    CoefficientSet c;
    c.betas.resize(2, 2);
    c.betas.row(0) = b1.transpose();
    c.betas.row(1) = b2.transpose();
    std::vector<double> tv{tau};
    EXPECT_NEAR(log_joint_prior_density(c, tv, id, cfg), want, 1e-10);
  }
}

// The joint over [-4,4]^4 loses mass along ridges as beta_11 -> 0, so the grid
// check is done level by level: the beta_2 conditional at fixed beta_1, and the
// beta_1 marginal.
TEST(LogDensity, GridNormalizationByLevel) {
  auto id = GramMatrix::identity(2);
  auto cfg = AopConfig::with_defaults(2, 2, TauMode::Fixed);
  cfg.gamma = 0.5;
  cfg.fixed_tau = {0.3};
  std::vector<double> tv{0.3};
  const int N = 161;
  const double h = 8.0 / (N - 1);
  CoefficientSet c;
  c.betas.resize(2, 2);
  for (Eigen::Vector2d b1 : {Eigen::Vector2d(0.8, 0.4), Eigen::Vector2d(-1.1, 0.9), Eigen::Vector2d(1.5, -0.2)}) {
    const double lp1 = mvn_logpdf(b1, Eigen::Vector2d::Zero(), cfg.gamma * Eigen::Matrix2d::Identity());
    double mass = 0.0;
    c.betas.row(0) = b1.transpose();
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        c.betas.row(1) << -4 + i * h, -4 + j * h;
        mass += std::exp(log_joint_prior_density(c, tv, id, cfg) - lp1);
      }
    EXPECT_NEAR(mass * h * h, 1.0, 0.02) << b1.transpose();
  }
  auto k1 = cfg;
  k1.K = 1;
  CoefficientSet c1;
  c1.betas.resize(1, 2);
  double mass1 = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      c1.betas << -4 + i * h, -4 + j * h;
      mass1 += std::exp(log_joint_prior_density(c1, {}, id, k1));
    }
  EXPECT_NEAR(mass1 * h * h, 1.0, 0.02);
}

TEST(LogDensity, RejectsNonPositiveTau) {
  auto id = GramMatrix::identity(2);
  auto cfg = AopConfig::with_defaults(2, 2, TauMode::Global);
  CoefficientSet c;
  c.betas = Eigen::Matrix2d::Identity();
  std::vector<double> tv{0.0};
  EXPECT_THROW(log_joint_prior_density(c, tv, id, cfg), ConfigError);
}

TEST(SequentialPrior, DeterministicGivenSeed) {
  auto sys = build_basis({BasisKind::CubicBsplineIntercept, 12, {0.0, 1.0}});
  auto cfg = AopConfig::with_defaults(5, 12);
  std::vector<double> tv{0.04};
  auto a = sample_sequential_prior(cfg, sys.gram(), tv, 123);
  auto b = sample_sequential_prior(cfg, sys.gram(), tv, 123);
  auto c = sample_sequential_prior(cfg, sys.gram(), tv, 124);
  EXPECT_EQ(a.betas, b.betas);
  EXPECT_NE(a.betas, c.betas);
}

TEST(SequentialPrior, SmallTauDrivesOrthogonality) {
  auto sys = build_basis({BasisKind::CubicBsplineIntercept, 12, {0.0, 1.0}});
  auto cfg = AopConfig::with_defaults(4, 12);
  double prev = INFINITY;
  for (double tau : {1.0, 1e-2, 1e-4}) {
    std::vector<double> tv{tau}, worst;
    for (std::uint64_t seed = 0; seed < 41; ++seed) {
      auto c = sample_sequential_prior(cfg, sys.gram(), tv, seed);
      double m = 0.0;
      for (int k = 1; k < 4; ++k)
        for (int j = 0; j < k; ++j) m = std::max(m, std::abs(inner_product(c.beta(j), c.beta(k), sys.gram())));
      worst.push_back(m);
    }
    std::nth_element(worst.begin(), worst.begin() + 20, worst.end());
    EXPECT_LT(worst[20], prev) << "tau^2=" << tau;
    prev = worst[20];
  }
  EXPECT_LT(prev, 0.05);
}

TEST(PriorSurface, RidgeFollowsOrthogonalLine) {
  Eigen::Vector2d b1(0.5, 1.0);
  std::vector<Eigen::Vector2d> pts;
  for (double s = -2.0; s <= 2.0; s += 0.5) {
    pts.emplace_back(s * Eigen::Vector2d(1.0, -0.5));
    pts.emplace_back(s * Eigen::Vector2d(1.0, -0.5) + 0.3 * b1.normalized());
  }
  auto d = figure1_density_grid(b1, 0.01, 1.0, pts);
  for (std::size_t i = 0; i < d.size(); i += 2) EXPECT_GT(d[i], 100 * d[i + 1]);
}

TEST(PriorSurface, ModeIsGridMaximumAndWeakConstraintHasMoreEntropy) {
  Eigen::Vector2d b1(0.5, 1.0);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 121; ++i)
    for (int j = 0; j < 121; ++j) pts.emplace_back(-3.0 + 0.05 * i, -3.0 + 0.05 * j);
  auto entropy = [&](double tau, double b02) {
    auto d = figure1_density_grid(b1, tau, b02, pts);
    auto best = std::max_element(d.begin(), d.end()) - d.begin();
    EXPECT_LT(pts[best].norm(), 1e-12);
    double s = 0.0, e = 0.0;
    for (double v : d) s += v;
    for (double v : d)
      if (v / s > 0) e -= (v / s) * std::log(v / s);
    return e;
  };
  EXPECT_GT(entropy(1.0, 1.0), entropy(0.01, 1.0));
}
