#include "aop/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "aop/error.hpp"

namespace aop {

namespace {

constexpr int kDegree = 3;

// Span index s with knots[s] <= t < knots[s+1]; the right boundary maps to the last nonempty span.
std::size_t find_span(const std::vector<double>& knots, double t) {
  const std::size_t n_basis = knots.size() - kDegree - 1;
  if (t >= knots[n_basis]) return n_basis - 1;
  auto it = std::upper_bound(knots.begin() + kDegree, knots.begin() + static_cast<long>(n_basis) + 1, t);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

// Normalized Legendre polynomials on [a, b] via the three-term recurrence.
void legendre_values(const Domain& d, double t, Eigen::Ref<Eigen::VectorXd> out) {
  const double x = 2.0 * (t - d.lower) / d.length() - 1.0;
  double p_prev = 1.0;
  double p = x;
  for (Eigen::Index l = 0; l < out.size(); ++l) {
    double value;
    if (l == 0) {
      value = 1.0;
    } else if (l == 1) {
      value = x;
    } else {
      const double nl = static_cast<double>(l);
      const double next = ((2.0 * nl - 1.0) * x * p - (nl - 1.0) * p_prev) / nl;
      p_prev = p;
      p = next;
      value = next;
    }
    out(l) = value * std::sqrt((2.0 * static_cast<double>(l) + 1.0) / d.length());
  }
}

}  // namespace

void BasisSpec::validate() const {
  if (!(domain.lower < domain.upper) || !std::isfinite(domain.lower) || !std::isfinite(domain.upper)) {
    throw ConfigError("basis domain must satisfy a < b");
  }
  if (size < 1) throw ConfigError("basis size must be >= 1");
  if (kind == BasisKind::CubicBsplineIntercept && size < 5) {
    throw ConfigError("cubic B-spline basis with intercept needs L >= 5, got " + std::to_string(size));
  }
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return {nodes, weights};
}

Eigen::VectorXd cubic_bspline_values(const std::vector<double>& knots, double t) {
  const std::size_t n_basis = knots.size() - kDegree - 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_basis));
  const std::size_t span = find_span(knots, t);

  // de Boor triangle: the degree+1 nonzero functions on this span.
  double n[kDegree + 1] = {1.0, 0.0, 0.0, 0.0};
  double left[kDegree + 1], right[kDegree + 1];
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = t - knots[span + 1 - static_cast<std::size_t>(j)];
    right[j] = knots[span + static_cast<std::size_t>(j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  for (int j = 0; j <= kDegree; ++j) out(static_cast<Eigen::Index>(span) - kDegree + j) = n[j];
  return out;
}

void BasisSystem::evaluate_into(double t, Eigen::Ref<Eigen::VectorXd> out) const {
  if (!spec_.domain.contains(t)) {
    throw DomainError("evaluation point " + std::to_string(t) + " outside basis domain [" +
                      std::to_string(spec_.domain.lower) + ", " + std::to_string(spec_.domain.upper) + "]");
  }
  if (spec_.kind == BasisKind::OrthonormalTest) {
    legendre_values(spec_.domain, t, out);
    return;
  }
  out(0) = 1.0;
  out.tail(spec_.size - 1) = cubic_bspline_values(knots_, t);
}

Eigen::VectorXd BasisSystem::evaluate(double t) const {
  Eigen::VectorXd out(spec_.size);
  evaluate_into(t, out);
  return out;
}

Eigen::MatrixXd BasisSystem::evaluate(std::span<const double> ts) const {
  Eigen::MatrixXd design(static_cast<Eigen::Index>(ts.size()), spec_.size);
  Eigen::VectorXd row(spec_.size);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    evaluate_into(ts[i], row);
    design.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return design;
}

BasisSystem build_basis(const BasisSpec& spec, int quadrature_points) {
  spec.validate();
  if (quadrature_points <= 0) quadrature_points = 10 * spec.size;
  if (quadrature_points < 2 * spec.size) {
    throw ConfigError("quadrature_points must be >= 2 * L");
  }

  BasisSystem sys;
  sys.spec_ = spec;
  const int L = spec.size;
  if (spec.kind == BasisKind::OrthonormalTest) {
    sys.gram_ = GramMatrix::identity(L);
    return sys;
  }

  const Domain& d = spec.domain;
  const int n_spline = L - 1;
  const int n_internal = n_spline - (kDegree + 1);
  sys.knots_.assign(kDegree + 1, d.lower);
  for (int i = 1; i <= n_internal; ++i) {
    sys.knots_.push_back(d.lower + d.length() * static_cast<double>(i) / static_cast<double>(n_internal + 1));
  }
  sys.knots_.insert(sys.knots_.end(), kDegree + 1, d.upper);

  // One Gauss-Legendre panel per knot span so every panel integrates a polynomial.
  const int panels = n_internal + 1;
  const int per_panel = std::max(kDegree + 1, (quadrature_points + panels - 1) / panels);
  const auto [nodes, weights] = gauss_legendre(per_panel);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(L, L);
  Eigen::VectorXd phi(L);
  for (int p = 0; p < panels; ++p) {
    const double lo = sys.knots_[static_cast<std::size_t>(kDegree + p)];
    const double hi = sys.knots_[static_cast<std::size_t>(kDegree + p + 1)];
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int q = 0; q < per_panel; ++q) {
      sys.evaluate_into(mid + half * nodes[static_cast<std::size_t>(q)], phi);
      m.noalias() += (half * weights[static_cast<std::size_t>(q)]) * phi * phi.transpose();
    }
  }
  sys.gram_.omega = 0.5 * (m + m.transpose());
  return sys;
}

double inner_product(const Eigen::VectorXd& beta_j, const Eigen::VectorXd& beta_k, const GramMatrix& gram) {
  if (beta_j.size() != gram.size() || beta_k.size() != gram.size()) {
    throw DimensionError("inner_product: coefficient length does not match Gram matrix size " +
                         std::to_string(gram.size()));
  }
  return beta_j.dot(gram.omega * beta_k);
}

double function_norm_sq(const Eigen::VectorXd& beta, const GramMatrix& gram) {
  const double v = inner_product(beta, beta, gram);
  return (v < 0.0 && v > -1e-10) ? 0.0 : v;
}

}  // namespace aop
