#include "aop/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aop/basis.hpp"
#include "aop/dataset.hpp"
#include "aop/error.hpp"
#include "aop/metrics.hpp"
#include "aop/output.hpp"
#include "aop/prior.hpp"
#include "aop/sampler.hpp"
#include "aop/simulation.hpp"

namespace aop::cli {

namespace {

namespace fs = std::filesystem;

struct McmcFlags {
  std::string prior = "aop-g";
  int K = 10;
  int L = 12;
  long iters = 3000;
  long burnin = 2000;
  long thin = 1;
  std::uint64_t seed = 1;
  double epsilon = 0.1;
  double gamma = 1.0;
  double a0 = 3.0;
  double b0 = 0.0;
  std::vector<double> tau;
  double init_var = 0.1;
  double time_scale = 1.0;
};

void add_mcmc_flags(CLI::App* app, McmcFlags& f, bool with_prior) {
  if (with_prior) {
    app->add_option("--prior", f.prior, "Coefficient prior")
        ->check(CLI::IsMember({"no", "no-s", "aop-g", "aop-l", "aop-fixed"}, CLI::ignore_case))
        ->capture_default_str();
    app->add_option("--tau", f.tau, "Fixed tau^2 values for aop-fixed (one or K-1)");
  }
  app->add_option("--K", f.K, "Maximum number of principal functions")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--L", f.L, "Number of basis functions (intercept + L-1 cubic B-splines)")
      ->check(CLI::Range(5, 1000))
      ->capture_default_str();
  app->add_option("--iters", f.iters, "Post-burn-in sweeps")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--burnin", f.burnin, "Burn-in sweeps")->check(CLI::NonNegativeNumber)->capture_default_str();
  app->add_option("--thin", f.thin, "Keep every thin-th draw")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--seed", f.seed, "Master random seed")->capture_default_str();
  app->add_option("--epsilon", f.epsilon, "Norm threshold for effective components")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--gamma", f.gamma, "Prior variance scale")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--a0", f.a0, "Shape of the tau^2 hyperprior")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--init-var", f.init_var, "Variance of the initial coefficient draws")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--b0", f.b0, "Scale of the tau^2 hyperprior (default 2/K^2)")->capture_default_str();
}

GibbsConfig make_gibbs(const McmcFlags& f) {
  GibbsConfig g;
  g.n_iter = f.iters;
  g.n_burnin = f.burnin;
  g.thin = f.thin;
  g.seed = f.seed;
  g.prior = parse_prior_family(f.prior);
  g.hyper.a0 = f.a0;
  g.hyper.b0 = f.b0;
  g.hyper.gamma = f.gamma;
  g.hyper.fixed_tau = f.tau;
  g.init_beta_var = f.init_var;
  return g;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError(dir, "cannot create output directory");
}

int cmd_simulate(const std::string& scenario, int n, int T, std::uint64_t seed, const std::string& out_path,
                 std::ostream& out) {
  ScenarioSpec spec;
  spec.scenario = parse_scenario(scenario);
  spec.n = n;
  spec.T = T;
  const FunctionalDataset data = generate_dataset(spec, seed);
  write_long_csv(out_path, data);
  nlohmann::json side = {{"scenario", to_string(spec.scenario)}, {"n", spec.n},           {"T", spec.T},
                         {"sigma", spec.sigma},                  {"score_sds", spec.score_sds}, {"seed", seed}};
  write_text_file(out_path + ".json", side.dump(2) + "\n");
  out << "wrote " << data.total_points() << " rows to " << out_path << "\n";
  return kOk;
}

int cmd_fit(const std::string& input, const McmcFlags& f, const std::string& dir, const std::string& config_echo,
            std::ostream& out) {
  const FunctionalDataset data = rescale_times(read_long_csv(input), f.time_scale);
  if (data.size() == 0) throw DomainError("input has no curves: " + input);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : data.curves) {
    for (double t : c.times) {
      lo = std::min(lo, t);
      hi = std::max(hi, t);
    }
  }
  if (!(lo < hi)) throw DomainError("observation times span a single point");
  if (f.K > f.L) throw ConfigError("K (" + std::to_string(f.K) + ") must not exceed L (" + std::to_string(f.L) + ")");

  const BasisSystem basis = build_basis({BasisKind::CubicBsplineIntercept, f.L, {lo, hi}});
  const GibbsConfig g = make_gibbs(f);
  const PosteriorDraws draws = run_gibbs(data, basis, f.K, g);
  const MetricReport report = compute_metrics(CoefficientSet{draws.beta_mean}, basis.gram(), f.epsilon);

  ensure_directory(dir);
  const fs::path p(dir);
  write_text_file((p / "summary.json").string(), summary_json(draws, report, f.epsilon).dump(2) + "\n");
  write_text_file((p / "metrics.json").string(), metric_report_json(report, f.epsilon).dump(2) + "\n");
  write_text_file((p / "functions.csv").string(), format_functions_csv(summarize_functions(draws, basis)));
  write_text_file((p / "ip_matrix.csv").string(), format_matrix_csv(report.ip_matrix));
  write_draws_bin((p / "draws.bin").string(), draws);
  write_text_file((p / "config.ini").string(), config_echo);

  out << "NC=" << report.nc << " OG=" << format_double(report.og) << " sigma2=" << format_double(draws.sigma_sq_mean())
      << "\n";
  return kOk;
}

int cmd_replicate(const std::vector<std::string>& scenarios, const std::vector<int>& ns,
                  const std::vector<std::string>& methods, int reps, int parallel, const McmcFlags& f,
                  const std::string& dir, const std::string& config_echo, bool quiet, std::ostream& out,
                  std::ostream& err) {
  StudyConfig sc;
  sc.scenarios.clear();
  for (const auto& s : split_list(scenarios)) sc.scenarios.push_back(parse_scenario(s));
  sc.ns = ns;
  sc.methods.clear();
  for (const auto& m : split_list(methods)) {
    const PriorFamily p = parse_prior_family(m);
    if (p == PriorFamily::AopFixed) throw ConfigError("replicate supports no, no-s, aop-g, aop-l");
    sc.methods.push_back(p);
  }
  sc.replications = reps;
  sc.K = f.K;
  sc.L = f.L;
  sc.epsilon = f.epsilon;
  sc.time_scale = f.time_scale;
  sc.mcmc = make_gibbs(f);
  sc.parallelism = parallel;
  if (!quiet) sc.progress = [&err](const std::string& msg) { err << msg << "\n"; };

  const StudyReport report = run_study(sc);
  ensure_directory(dir);
  const fs::path p(dir);
  write_study_csv((p / "study.csv").string(), report);
  const std::string table = format_study_table(report);
  write_text_file((p / "table.txt").string(), table);
  write_text_file((p / "config.ini").string(), config_echo);
  out << table;
  if (report.any_aborted()) {
    err << "one or more cells aborted (more than 10% failed replications)\n";
    return kNumericalError;
  }
  return kOk;
}

int cmd_scale(const std::string& input, const std::string& out_path, std::ostream& out) {
  const FunctionalDataset scaled = scale_to_unit_rms(read_long_csv(input));
  write_long_csv(out_path, scaled);
  out << "scaled " << scaled.size() << " curves to " << out_path << "\n";
  return kOk;
}

int cmd_prior_plot(int grid_size, double extent, const std::string& out_path, std::ostream& out) {
  if (grid_size < 2) throw ConfigError("grid size must be >= 2");
  if (!(extent > 0.0)) throw ConfigError("extent must be > 0");
  const Eigen::Vector2d beta1(0.5, 1.0);
  struct Setting {
    double tau_sq, b02;
    const char* label;
  };
  const Setting settings[] = {{0.01, 1.0, "tau2=0.01_B02=1"}, {1.0, 1.0, "tau2=1_B02=1"}, {0.01, 2.0, "tau2=0.01_B02=2"}};
  std::vector<Eigen::Vector2d> points;
  points.reserve(static_cast<std::size_t>(grid_size * grid_size));
  for (int i = 0; i < grid_size; ++i) {
    for (int j = 0; j < grid_size; ++j) {
      const double x = -extent + 2.0 * extent * i / (grid_size - 1);
      const double y = -extent + 2.0 * extent * j / (grid_size - 1);
      points.emplace_back(x, y);
    }
  }
  std::ostringstream os;
  os << "x,y,density,config_label\n";
  for (const auto& s : settings) {
    const auto dens = figure1_density_grid(beta1, s.tau_sq, s.b02, points);
    for (std::size_t k = 0; k < points.size(); ++k) {
      os << format_double(points[k].x()) << ',' << format_double(points[k].y()) << ',' << format_double(dens[k])
         << ',' << s.label << '\n';
    }
  }
  write_text_file(out_path, os.str());
  out << "wrote 3 density surfaces on a " << grid_size << "x" << grid_size << " grid to " << out_path << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive orthogonal prior for Bayesian functional PCA"};
  app.set_config("--config", "", "Optional INI/TOML config file; command-line flags take precedence");
  app.require_subcommand(1);

  std::string scenario = "legendre";
  int n = 100, T = 30;
  std::uint64_t sim_seed = 1;
  std::string sim_out = "simulated.csv";
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset (long CSV id,t,y + JSON sidecar)");
  sim->add_option("--scenario", scenario, "legendre or haar")->capture_default_str();
  sim->add_option("--n", n, "Number of curves")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--T", T, "Grid size")->check(CLI::Range(2, 1000000))->capture_default_str();
  sim->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim->add_option("--out", sim_out, "Output CSV path")->capture_default_str();

  McmcFlags fit_flags;
  std::string fit_input, fit_out = "fit_out";
  auto* fit = app.add_subcommand("fit", "Fit the Bayesian FPCA model to a long CSV");
  fit->add_option("--input", fit_input, "Input CSV (id,t,y)")->required()->check(CLI::ExistingFile);
  add_mcmc_flags(fit, fit_flags, true);
  fit->add_option("--time-scale", fit_flags.time_scale, "Multiply observation times by this factor before fitting")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit->add_option("--out", fit_out, "Output directory")->capture_default_str();

  McmcFlags rep_flags;
  std::vector<std::string> rep_scenarios{"legendre"}, rep_methods{"no", "no-s", "aop-g", "aop-l"};
  std::vector<int> rep_ns{100};
  int reps = 20, parallel = 1;
  bool quiet = false;
  std::string rep_out = "study_out";
  auto* rep = app.add_subcommand("replicate", "Run the Monte Carlo simulation study");
  rep->add_option("--scenario", rep_scenarios, "Scenarios (comma separated)")->delimiter(',')->capture_default_str();
  rep->add_option("--n", rep_ns, "Sample sizes (comma separated)")->delimiter(',')->capture_default_str();
  rep->add_option("--methods", rep_methods, "Methods (comma separated)")->delimiter(',')->capture_default_str();
  rep->add_option("--reps", reps, "Replications per cell")->check(CLI::PositiveNumber)->capture_default_str();
  rep->add_option("--parallel", parallel, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  rep->add_flag("--quiet", quiet, "Suppress per-replication progress");
  add_mcmc_flags(rep, rep_flags, false);
  rep_flags.time_scale = 0.0;
  rep->add_option("--time-scale", rep_flags.time_scale,
                  "Time axis used for fitting; 0 means T-1 (units of the sampling interval)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  rep->add_option("--out", rep_out, "Output directory")->capture_default_str();

  std::string scale_input, scale_out = "scaled.csv";
  auto* scale = app.add_subcommand("scale", "Divide each curve by its root mean square");
  scale->add_option("--input", scale_input, "Input CSV (id,t,y)")->required()->check(CLI::ExistingFile);
  scale->add_option("--out", scale_out, "Output CSV path")->capture_default_str();

  int grid_size = 201;
  double extent = 3.0;
  std::string plot_out = "prior_density.csv";
  auto* plot = app.add_subcommand("prior-plot", "Conditional prior density surfaces of beta_2 given beta_1");
  plot->add_option("--grid-size", grid_size, "Lattice points per axis")->capture_default_str();
  plot->add_option("--extent", extent, "Lattice covers [-extent, extent]^2")->capture_default_str();
  plot->add_option("--out", plot_out, "Output CSV path")->capture_default_str();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*sim) return cmd_simulate(scenario, n, T, sim_seed, sim_out, out);
    if (*fit) return cmd_fit(fit_input, fit_flags, fit_out, app.config_to_str(true, false), out);
    if (*rep) {
      return cmd_replicate(rep_scenarios, rep_ns, rep_methods, reps, parallel, rep_flags, rep_out,
                           app.config_to_str(true, false), quiet, out, err);
    }
    if (*scale) return cmd_scale(scale_input, scale_out, out);
    if (*plot) return cmd_prior_plot(grid_size, extent, plot_out, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kUsageError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const DegenerateConstraintError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace aop::cli
