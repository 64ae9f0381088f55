#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "aop/error.hpp"
#include "aop/simulation.hpp"
#include "oracles.hpp"

using namespace aop;

TEST(TrueFunctions, PrintedValues) {
  auto l = true_functions(Scenario::Legendre, 0.5);
  EXPECT_NEAR(l[0], 0.0, 1e-15);
  EXPECT_NEAR(l[1], -std::sqrt(5.0) / 2, 1e-15);
  EXPECT_NEAR(l[2], 0.0, 1e-14);
  auto h = true_functions(Scenario::Haar, 0.1);
  EXPECT_EQ(h[0], 1.0);
  EXPECT_EQ(h[1], std::sqrt(2.0));
  EXPECT_EQ(h[2], 0.0);
}

TEST(TrueFunctions, HaarBoundaries) {
  auto at = [](double t) { return true_functions(Scenario::Haar, t); };
  EXPECT_EQ(at(0.0)[0], 1.0);
  EXPECT_EQ(at(0.5)[0], -1.0);
  EXPECT_EQ(at(1.0)[0], -1.0);
  EXPECT_EQ(at(0.25)[1], -std::sqrt(2.0));
  EXPECT_EQ(at(0.5)[1], 0.0);
  EXPECT_EQ(at(0.75)[2], -std::sqrt(2.0));
  EXPECT_EQ(at(1.0)[2], -std::sqrt(2.0));
  EXPECT_THROW(at(1.0001), DomainError);
  EXPECT_THROW(true_functions(Scenario::Legendre, -0.1), DomainError);
}

TEST(TrueFunctions, LegendreOrthonormal) {
  for (int j = 0; j < 3; ++j)
    for (int k = j; k < 3; ++k) {
      double v = oracle::integrate(
          [&](double t) { return true_functions(Scenario::Legendre, t)[j] * true_functions(Scenario::Legendre, t)[k]; },
          0.0, 1.0);
      EXPECT_NEAR(v, j == k ? 1.0 : 0.0, 1e-6);
    }
}

TEST(TrueFunctions, HaarOrthonormalByPieces) {
  // constant on quarters: the integral is the mean of the four midpoint products
  for (int j = 0; j < 3; ++j)
    for (int k = j; k < 3; ++k) {
      double v = 0.0;
      for (double mid : {0.125, 0.375, 0.625, 0.875})
        v += 0.25 * true_functions(Scenario::Haar, mid)[j] * true_functions(Scenario::Haar, mid)[k];
      EXPECT_NEAR(v, j == k ? 1.0 : 0.0, 1e-15);
    }
}

TEST(Scenarios, ParseNames) {
  EXPECT_EQ(parse_scenario("legendre"), Scenario::Legendre);
  EXPECT_EQ(parse_scenario("2"), Scenario::Haar);
  EXPECT_EQ(parse_scenario(to_string(Scenario::Haar)), Scenario::Haar);
  EXPECT_THROW(parse_scenario("fourier"), ConfigError);
}

TEST(Generator, GridShapeAndDeterminism) {
  ScenarioSpec spec{Scenario::Haar, 7};
  auto a = generate_dataset(spec, 5);
  ASSERT_EQ(a.size(), 7u);
  EXPECT_EQ(a.curves[0].id, "1");
  EXPECT_EQ(a.curves[6].id, "7");
  for (const auto& c : a.curves) {
    ASSERT_EQ(c.size(), 30u);
    for (int j = 0; j < 30; ++j) EXPECT_DOUBLE_EQ(c.times[j], j / 29.0);
    EXPECT_EQ(c.times.back(), 1.0);
  }
  EXPECT_EQ(a, generate_dataset(spec, 5));
  EXPECT_NE(a, generate_dataset(spec, 6));
}

TEST(Generator, NoiselessFixedScoresReproduceFirstFunction) {
  ScenarioSpec spec{Scenario::Legendre, 3};
  spec.sigma = 0.0;
  auto d = generate_dataset(spec, 1, std::array<double, 3>{1.0, 0.0, 0.0});
  for (const auto& c : d.curves)
    for (std::size_t j = 0; j < c.size(); ++j)
      EXPECT_EQ(c.values[j], true_functions(Scenario::Legendre, c.times[j])[0]);
}

TEST(Generator, VarianceDecomposition) {
  for (auto sc : {Scenario::Legendre, Scenario::Haar}) {
    auto d = generate_dataset({sc, 10000}, 11);
    for (int j : {0, 7, 15, 29}) {
      std::vector<double> y;
      for (const auto& c : d.curves) y.push_back(c.values[j]);
      auto f = true_functions(sc, d.curves[0].times[j]);
      const double want = f[0] * f[0] + 0.49 * f[1] * f[1] + 0.25 * f[2] * f[2] + 1.0;
      auto m = oracle::moments(y);
      const double se = std::sqrt((m.m4 - m.var * m.var) / y.size());
      EXPECT_LT(std::abs(m.var - want), 3 * se) << to_string(sc) << " j=" << j;
    }
  }
}

TEST(Generator, InvalidSpec) {
  EXPECT_THROW(generate_dataset({Scenario::Legendre, 0}, 1), ConfigError);
  ScenarioSpec s{Scenario::Legendre, 5};
  s.T = 1;
  EXPECT_THROW(generate_dataset(s, 1), ConfigError);
}

namespace {

StudyConfig tiny_study(int parallelism) {
  StudyConfig c;
  c.scenarios = {Scenario::Legendre, Scenario::Haar};
  c.ns = {20};
  c.methods = {PriorFamily::NO, PriorFamily::AopGlobal};
  c.replications = 3;
  c.K = 4;
  c.L = 8;
  c.mcmc.n_iter = 60;
  c.mcmc.n_burnin = 40;
  c.mcmc.seed = 2024;
  c.parallelism = parallelism;
  return c;
}

}  // namespace

TEST(Study, ParallelismIndependent) {
  auto a = run_study(tiny_study(1));
  auto b = run_study(tiny_study(3));
  ASSERT_EQ(a.cells.size(), 4u);
  EXPECT_EQ(format_study_csv(a), format_study_csv(b));
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].nc, b.cells[i].nc);
    EXPECT_EQ(a.cells[i].og, b.cells[i].og);
  }
}

TEST(Study, CsvContractAndRanges) {
  auto cfg = tiny_study(1);
  int events = 0;
  cfg.progress = [&](const std::string&) { ++events; };
  auto r = run_study(cfg);
  EXPECT_EQ(events, 12);
  std::istringstream in(format_study_csv(r));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "scenario,n,method,nc_mean,nc_sd,og_mean,og_sd,failures");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
  for (const auto& c : r.cells) {
    EXPECT_EQ(c.nc.size(), 3u);
    EXPECT_GE(c.nc_mean(), 0.0);
    EXPECT_LE(c.nc_mean(), 4.0);
    EXPECT_GE(c.og_mean(), 0.0);
    EXPECT_GE(c.nc_sd(), 0.0);
    EXPECT_GE(c.og_sd(), 0.0);
  }
  EXPECT_FALSE(r.any_aborted());
  EXPECT_FALSE(format_study_table(r).empty());
}

TEST(Study, CellStatistics) {
  StudyCell c;
  c.nc = {3, 3, 4};
  c.og = {0.1, 0.3, 0.2};
  EXPECT_NEAR(c.nc_mean(), 10.0 / 3, 1e-15);
  EXPECT_NEAR(c.nc_sd(), std::sqrt(1.0 / 3), 1e-15);
  EXPECT_NEAR(c.og_mean(), 0.2, 1e-15);
  EXPECT_NEAR(c.og_sd(), 0.1, 1e-15);
}
