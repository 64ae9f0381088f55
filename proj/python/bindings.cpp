#include <limits>
#include <map>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aop/basis.hpp"
#include "aop/dataset.hpp"
#include "aop/error.hpp"
#include "aop/metrics.hpp"
#include "aop/prior.hpp"
#include "aop/sampler.hpp"
#include "aop/simulation.hpp"

namespace py = pybind11;
using namespace aop;

namespace {

BasisKind parse_kind(const std::string& kind) {
  if (kind == "spline") return BasisKind::CubicBsplineIntercept;
  if (kind == "orthonormal") return BasisKind::OrthonormalTest;
  throw ConfigError("unknown basis kind '" + kind + "' (spline or orthonormal)");
}

FunctionalDataset to_dataset(const std::vector<std::string>& ids, const std::vector<double>& t,
                             const std::vector<double>& y) {
  if (ids.size() != t.size() || t.size() != y.size()) throw DimensionError("ids, t and y must have equal length");
  FunctionalDataset d;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, fresh] = index.try_emplace(ids[i], d.curves.size());
    if (fresh) d.curves.push_back(Curve{ids[i], {}, {}});
    d.curves[it->second].times.push_back(t[i]);
    d.curves[it->second].values.push_back(y[i]);
  }
  return d;
}

py::dict metrics_dict(const MetricReport& r) {
  py::dict out;
  out["nc"] = r.nc;
  out["og"] = r.og;
  out["norms"] = r.norms;
  out["ip_matrix"] = r.ip_matrix;
  return out;
}

py::array_t<double> cube(const std::vector<double>& flat, long n0, long n1, long n2) {
  py::array_t<double> a({n0, n1, n2});
  std::copy(flat.begin(), flat.end(), a.mutable_data());
  return a;
}

}  // namespace

PYBIND11_MODULE(_aop, m) {
  m.doc() = "Adaptive orthogonal prior for Bayesian functional PCA";

  static py::exception<Error> base(m, "AopError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  py::class_<BasisSystem>(m, "Basis")
      .def_property_readonly("size", &BasisSystem::size)
      .def_property_readonly("domain", [](const BasisSystem& b) { return std::pair(b.domain().lower, b.domain().upper); })
      .def_property_readonly("knots", &BasisSystem::knots)
      .def_property_readonly("gram", [](const BasisSystem& b) { return b.gram().omega; })
      .def("evaluate", [](const BasisSystem& b, double t) { return b.evaluate(t); }, py::arg("t"))
      .def("design", [](const BasisSystem& b, const std::vector<double>& ts) {
        Eigen::MatrixXd out(ts.size(), b.size());
        for (std::size_t i = 0; i < ts.size(); ++i) out.row(i) = b.evaluate(ts[i]).transpose();
        return out;
      }, py::arg("t"));

  m.def("build_basis",
        [](int L, double lower, double upper, const std::string& kind) {
          return build_basis({parse_kind(kind), L, {lower, upper}});
        },
        py::arg("L"), py::arg("lower") = 0.0, py::arg("upper") = 1.0, py::arg("kind") = "spline");

  m.def("conditional_prior",
        [](const Eigen::MatrixXd& prefix, const Eigen::MatrixXd& gram, double tau_sq, double gamma) {
          const auto p = conditional_prior_params(prefix, GramMatrix{gram}, tau_sq,
                                                  build_h_matrix(static_cast<int>(gram.rows()), static_cast<int>(prefix.rows())),
                                                  gamma);
          return std::pair(p.mean, p.cov);
        },
        py::arg("prefix"), py::arg("gram"), py::arg("tau_sq"), py::arg("gamma") = 1.0,
        "Mean and covariance of beta_{j+1} given the rows of prefix.");

  m.def("conditional_trace_variance",
        [](const Eigen::MatrixXd& prefix, double tau_sq, double gamma) {
          const int L = static_cast<int>(prefix.cols());
          return conditional_trace_variance(prefix, tau_sq, gamma, build_h_matrix(L, static_cast<int>(prefix.rows())),
                                            GramMatrix::identity(L));
        },
        py::arg("prefix"), py::arg("tau_sq"), py::arg("gamma") = 1.0);

  m.def("sample_prior",
        [](int K, const Eigen::MatrixXd& gram, const std::vector<double>& tau, double gamma, std::uint64_t seed) {
          AopConfig cfg;
          cfg.K = K;
          cfg.L = static_cast<int>(gram.rows());
          cfg.gamma = gamma;
          cfg.fixed_tau = tau;
          return sample_sequential_prior(cfg, GramMatrix{gram}, expand_tau(tau, K), seed).betas;
        },
        py::arg("K"), py::arg("gram"), py::arg("tau"), py::arg("gamma") = 1.0, py::arg("seed") = 1);

  m.def("true_functions",
        [](const std::string& scenario, const std::vector<double>& ts) {
          const Scenario s = parse_scenario(scenario);
          Eigen::MatrixXd out(ts.size(), 3);
          for (std::size_t i = 0; i < ts.size(); ++i) {
            const auto f = true_functions(s, ts[i]);
            out.row(i) << f[0], f[1], f[2];
          }
          return out;
        },
        py::arg("scenario"), py::arg("t"));

  m.def("generate_dataset",
        [](const std::string& scenario, int n, int T, std::uint64_t seed) {
          ScenarioSpec spec;
          spec.scenario = parse_scenario(scenario);
          spec.n = n;
          spec.T = T;
          const auto d = generate_dataset(spec, seed);
          std::vector<std::string> ids;
          std::vector<double> t, y;
          for (const auto& c : d.curves) {
            for (std::size_t j = 0; j < c.size(); ++j) {
              ids.push_back(c.id);
              t.push_back(c.times[j]);
              y.push_back(c.values[j]);
            }
          }
          return py::make_tuple(ids, py::array(py::cast(t)), py::array(py::cast(y)));
        },
        py::arg("scenario") = "legendre", py::arg("n") = 100, py::arg("T") = 30, py::arg("seed") = 1,
        "Long-format (ids, t, y) with t on [0, 1].");

  m.def("compute_metrics",
        [](const Eigen::MatrixXd& betas, const Eigen::MatrixXd& gram, double epsilon) {
          return metrics_dict(compute_metrics(CoefficientSet{betas}, GramMatrix{gram}, epsilon));
        },
        py::arg("betas"), py::arg("gram"), py::arg("epsilon") = 0.1);

  m.def("fit",
        [](const std::vector<std::string>& ids, const std::vector<double>& t, const std::vector<double>& y, int K,
           int L, const std::string& prior, long iters, long burnin, long thin, std::uint64_t seed, double epsilon,
           double time_scale) {
          const auto data = rescale_times(to_dataset(ids, t, y), time_scale);
          double lo = std::numeric_limits<double>::infinity(), hi = -lo;
          for (const auto& c : data.curves)
            for (double v : c.times) lo = std::min(lo, v), hi = std::max(hi, v);
          if (!(lo < hi)) throw DomainError("observation times span a single point");
          const auto basis = build_basis({BasisKind::CubicBsplineIntercept, L, {lo, hi}});
          GibbsConfig cfg;
          cfg.prior = parse_prior_family(prior);
          cfg.n_iter = iters;
          cfg.n_burnin = burnin;
          cfg.thin = thin;
          cfg.seed = seed;
          cfg.keep_scores = false;
          PosteriorDraws d;
          {
            py::gil_scoped_release release;
            d = run_gibbs(data, basis, K, cfg);
          }
          py::dict out = metrics_dict(compute_metrics(CoefficientSet{d.beta_mean}, basis.gram(), epsilon));
          out["beta_mean"] = d.beta_mean;
          out["betas"] = cube(d.betas, d.draw_count, d.K, d.L);
          out["lambda_mean"] = d.lambda_mean();
          out["tau_mean"] = d.tau_mean();
          out["sigma_sq"] = py::array(py::cast(d.sigma_sqs));
          out["gram"] = basis.gram().omega;
          out["domain"] = std::pair(lo, hi);
          out["prior"] = to_string(d.prior);
          return out;
        },
        py::arg("ids"), py::arg("t"), py::arg("y"), py::arg("K") = 10, py::arg("L") = 12, py::arg("prior") = "aop-g",
        py::arg("iters") = 3000, py::arg("burnin") = 2000, py::arg("thin") = 1, py::arg("seed") = 1,
        py::arg("epsilon") = 0.1, py::arg("time_scale") = 1.0);
}
