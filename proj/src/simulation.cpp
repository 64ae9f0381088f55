#include "aop/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "aop/error.hpp"
#include "aop/metrics.hpp"

namespace aop {

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for a single value.
double sd_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  if (v.size() == 1) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::Legendre ? "legendre" : "haar"; }

Scenario parse_scenario(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "legendre" || s == "1") return Scenario::Legendre;
  if (s == "haar" || s == "2") return Scenario::Haar;
  throw ConfigError("unknown scenario '" + std::string(name) + "' (expected legendre or haar)");
}

std::array<double, 3> true_functions(Scenario scenario, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("true_functions: t = " + std::to_string(t) + " outside [0, 1]");
  if (scenario == Scenario::Legendre) {
    return {std::sqrt(3.0) * (2.0 * t - 1.0), std::sqrt(5.0) * (6.0 * t * t - 6.0 * t + 1.0),
            std::sqrt(7.0) * (20.0 * t * t * t - 30.0 * t * t + 12.0 * t - 1.0)};
  }
  const double r2 = std::sqrt(2.0);
  const double f1 = t < 0.5 ? 1.0 : -1.0;
  const double f2 = t < 0.25 ? r2 : (t < 0.5 ? -r2 : 0.0);
  const double f3 = t < 0.5 ? 0.0 : (t < 0.75 ? r2 : -r2);
  return {f1, f2, f3};
}

void ScenarioSpec::validate() const {
  if (n <= 0) throw ConfigError("scenario n must be > 0");
  if (T <= 1) throw ConfigError("scenario T must be > 1");
  if (!(sigma >= 0.0)) throw ConfigError("scenario sigma must be >= 0");
}

FunctionalDataset generate_dataset(const ScenarioSpec& spec, std::uint64_t seed,
                                   const std::optional<std::array<double, 3>>& fixed_scores) {
  spec.validate();
  Rng rng(seed);
  std::vector<double> grid(static_cast<std::size_t>(spec.T));
  std::vector<std::array<double, 3>> f(grid.size());
  for (int j = 0; j < spec.T; ++j) {
    grid[static_cast<std::size_t>(j)] = static_cast<double>(j) / static_cast<double>(spec.T - 1);
    f[static_cast<std::size_t>(j)] = true_functions(spec.scenario, grid[static_cast<std::size_t>(j)]);
  }
  FunctionalDataset data;
  data.curves.reserve(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    std::array<double, 3> xi{};
    for (int k = 0; k < 3; ++k) xi[static_cast<std::size_t>(k)] = spec.score_sds[static_cast<std::size_t>(k)] * rng.normal();
    if (fixed_scores) xi = *fixed_scores;
    Curve c{std::to_string(i + 1), grid, std::vector<double>(grid.size())};
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double eps = rng.normal();
      c.values[j] = xi[0] * f[j][0] + xi[1] * f[j][1] + xi[2] * f[j][2] + spec.sigma * eps;
    }
    data.curves.push_back(std::move(c));
  }
  return data;
}

double StudyCell::nc_mean() const { return mean_of(as_double(nc)); }
double StudyCell::nc_sd() const { return sd_of(as_double(nc)); }
double StudyCell::og_mean() const { return mean_of(og); }
double StudyCell::og_sd() const { return sd_of(og); }

bool StudyReport::any_aborted() const {
  return std::any_of(cells.begin(), cells.end(), [](const StudyCell& c) { return c.aborted; });
}

StudyReport run_study(const StudyConfig& config) {
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  const double time_scale = config.time_scale > 0.0 ? config.time_scale : static_cast<double>(config.T - 1);
  const BasisSystem basis = build_basis({BasisKind::CubicBsplineIntercept, config.L, {0.0, time_scale}});
  config.mcmc.validate(config.K, config.L);

  struct Task {
    std::size_t cell;
    int rep;
  };
  struct Outcome {
    bool ok = false;
    int nc = 0;
    double og = 0.0;
    std::string error;
  };

  StudyReport report;
  report.replications = config.replications;
  std::vector<Task> tasks;
  for (Scenario sc : config.scenarios) {
    for (int n : config.ns) {
      for (PriorFamily m : config.methods) {
        StudyCell cell;
        cell.scenario = sc;
        cell.n = n;
        cell.method = m;
        for (int r = 0; r < config.replications; ++r) tasks.push_back({report.cells.size(), r});
        report.cells.push_back(std::move(cell));
      }
    }
  }

  std::vector<Outcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  const std::uint64_t master = config.mcmc.seed;

  auto worker = [&]() {
    for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1)) {
      const Task& task = tasks[t];
      const StudyCell& cell = report.cells[task.cell];
      Outcome& out = outcomes[t];
      try {
        ScenarioSpec spec;
        spec.scenario = cell.scenario;
        spec.n = cell.n;
        spec.T = config.T;
        const auto sc = static_cast<std::uint64_t>(cell.scenario);
        const auto n = static_cast<std::uint64_t>(cell.n);
        const auto r = static_cast<std::uint64_t>(task.rep);
        const FunctionalDataset data =
            rescale_times(generate_dataset(spec, derive_seed(master, {sc, n, r})), time_scale);
        GibbsConfig mcmc = config.mcmc;
        mcmc.prior = cell.method;
        mcmc.keep_scores = false;
        mcmc.track_log_joint = false;
        mcmc.seed = derive_seed(master, {sc, n, static_cast<std::uint64_t>(cell.method) + 1000, r});
        const PosteriorDraws draws = run_gibbs(data, basis, config.K, mcmc);
        const CoefficientSet means{draws.beta_mean};
        out.nc = effective_components(means, basis.gram(), config.epsilon);
        out.og = orthogonality_measure(means, basis.gram());
        out.ok = true;
      } catch (const Error& e) {
        out.error = e.what();
      }
      if (config.progress) {
        std::lock_guard lock(progress_mutex);
        std::string msg = to_string(cell.scenario) + " n=" + std::to_string(cell.n) + " " + to_string(cell.method) +
                          " rep " + std::to_string(task.rep + 1) + "/" + std::to_string(config.replications);
        msg += out.ok ? " NC=" + std::to_string(out.nc) + " OG=" + fixed(out.og, 4) : " FAILED: " + out.error;
        config.progress(msg);
      }
    }
  };

  const int threads = std::min<int>(config.parallelism, static_cast<int>(tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    StudyCell& cell = report.cells[tasks[t].cell];
    if (outcomes[t].ok) {
      cell.nc.push_back(outcomes[t].nc);
      cell.og.push_back(outcomes[t].og);
    } else {
      ++cell.failures;
    }
  }
  for (auto& cell : report.cells) {
    cell.aborted = static_cast<double>(cell.failures) > 0.1 * static_cast<double>(config.replications);
  }
  return report;
}

std::string format_study_csv(const StudyReport& report) {
  std::ostringstream os;
  os << "scenario,n,method,nc_mean,nc_sd,og_mean,og_sd,failures\n";
  for (const auto& c : report.cells) {
    const bool valid = !c.aborted && !c.nc.empty();
    auto num = [&](double v) { return valid ? format_double(v) : std::string("NA"); };
    os << to_string(c.scenario) << ',' << c.n << ',' << to_string(c.method) << ',' << num(c.nc_mean()) << ','
       << num(c.nc_sd()) << ',' << num(c.og_mean()) << ',' << num(c.og_sd()) << ',' << c.failures << '\n';
  }
  return os.str();
}

void write_study_csv(const std::string& path, const StudyReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path, "cannot open output file");
  out << format_study_csv(report);
  if (!out) throw IoError(path, "write failed");
}

std::string format_study_table(const StudyReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-9s %5s %-9s %16s %16s %8s\n", "scenario", "n", "method", "NC mean (sd)",
                "OG mean (sd)", "failures");
  os << line;
  for (const auto& c : report.cells) {
    std::string nc = "aborted", og = "aborted";
    if (!c.aborted && !c.nc.empty()) {
      nc = fixed(c.nc_mean(), 2) + " (" + fixed(c.nc_sd(), 2) + ")";
      og = fixed(c.og_mean(), 2) + " (" + fixed(c.og_sd(), 2) + ")";
    }
    std::snprintf(line, sizeof(line), "%-9s %5d %-9s %16s %16s %8d\n", to_string(c.scenario).c_str(), c.n,
                  to_string(c.method).c_str(), nc.c_str(), og.c_str(), c.failures);
    os << line;
  }
  return os.str();
}

}  // namespace aop
