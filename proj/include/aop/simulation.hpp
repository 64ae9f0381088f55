#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aop/dataset.hpp"
#include "aop/sampler.hpp"

namespace aop {

enum class Scenario { Legendre, Haar };

std::string to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

/// f_1, f_2, f_3 at t in [0, 1]: scaled Legendre polynomials or scaled Haar wavelets.
std::array<double, 3> true_functions(Scenario scenario, double t);

struct ScenarioSpec {
  Scenario scenario = Scenario::Legendre;
  int n = 100;
  int T = 30;
  double sigma = 1.0;
  std::array<double, 3> score_sds{1.0, 0.7, 0.5};

  void validate() const;
};

/// Curves on the grid t_j = (j-1)/(T-1) with ids "1".."n". When `fixed_scores` is
/// set every curve uses those scores instead of random ones (test hook).
FunctionalDataset generate_dataset(const ScenarioSpec& spec, std::uint64_t seed,
                                   const std::optional<std::array<double, 3>>& fixed_scores = std::nullopt);

struct StudyCell {
  Scenario scenario = Scenario::Legendre;
  int n = 0;
  PriorFamily method = PriorFamily::AopGlobal;
  std::vector<int> nc;      // successful replications only
  std::vector<double> og;
  int failures = 0;
  bool aborted = false;

  double nc_mean() const;
  double nc_sd() const;
  double og_mean() const;
  double og_sd() const;
};

struct StudyReport {
  std::vector<StudyCell> cells;
  int replications = 0;

  bool any_aborted() const;
};

struct StudyConfig {
  std::vector<Scenario> scenarios{Scenario::Legendre};
  std::vector<int> ns{100};
  std::vector<PriorFamily> methods{PriorFamily::NO, PriorFamily::NOS, PriorFamily::AopGlobal, PriorFamily::AopLocal};
  int replications = 20;
  int K = 10;
  int L = 12;
  int T = 30;
  /// Fits are run on times multiplied by this factor, so the basis domain is
  /// [0, time_scale] and Omega, NC and OG are measured on that axis. <= 0 selects
  /// T - 1 (time in units of the sampling interval).
  double time_scale = 0.0;
  double epsilon = 0.1;
  GibbsConfig mcmc;  ///< seed is the master seed; prior is overridden per cell
  int parallelism = 1;
  std::function<void(const std::string&)> progress;  ///< invoked from worker threads, serialized
};

/// Data for replication r of (scenario, n) is shared by all methods; the chain seed
/// additionally mixes in the method. Results do not depend on `parallelism`.
StudyReport run_study(const StudyConfig& config);

void write_study_csv(const std::string& path, const StudyReport& report);
std::string format_study_csv(const StudyReport& report);
std::string format_study_table(const StudyReport& report);

}  // namespace aop
