#include "aop/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "aop/error.hpp"

namespace aop {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double log_inv_gamma_kernel(double x, double shape, double scale) {
  return -(shape + 1.0) * std::log(x) - scale / x;
}

std::string dump_state(const GibbsState& s) {
  std::ostringstream os;
  os << "non-finite sampler state: sigma^2=" << s.sigma_sq << " lambda=[" << s.lambdas.transpose() << "] tau^2=[";
  for (double t : s.tau_sqs) os << ' ' << t;
  os << " ] max|beta|=" << s.betas.cwiseAbs().maxCoeff() << " max|Z|=" << s.scores.cwiseAbs().maxCoeff();
  return os.str();
}

double quantile_sorted(const std::vector<double>& v, double p) {
  if (v.empty()) return std::nan("");
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::string to_string(PriorFamily p) {
  switch (p) {
    case PriorFamily::NO: return "NO";
    case PriorFamily::NOS: return "NO-S";
    case PriorFamily::AopGlobal: return "AOP-G";
    case PriorFamily::AopLocal: return "AOP-L";
    case PriorFamily::AopFixed: return "AOP-fixed";
  }
  return "?";
}

PriorFamily parse_prior_family(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "no") return PriorFamily::NO;
  if (s == "no-s" || s == "nos") return PriorFamily::NOS;
  if (s == "aop-g") return PriorFamily::AopGlobal;
  if (s == "aop-l") return PriorFamily::AopLocal;
  if (s == "aop-fixed") return PriorFamily::AopFixed;
  throw ConfigError("unknown prior family '" + std::string(name) + "' (expected no, no-s, aop-g, aop-l, aop-fixed)");
}

bool is_orthogonal_prior(PriorFamily p) {
  return p == PriorFamily::AopGlobal || p == PriorFamily::AopLocal || p == PriorFamily::AopFixed;
}

void GibbsConfig::validate(int K, int L) const {
  if (n_iter <= 0) throw ConfigError("n_iter must be > 0");
  if (n_burnin < 0) throw ConfigError("n_burnin must be >= 0");
  if (thin <= 0) throw ConfigError("thin must be > 0");
  if (K < 1 || K > L) {
    throw ConfigError("need 1 <= K <= L, got K=" + std::to_string(K) + " L=" + std::to_string(L));
  }
  const Hyper& h = hyper;
  if (!(h.a_lambda > 0 && h.b_lambda > 0 && h.a_sigma > 0 && h.b_sigma > 0)) {
    throw ConfigError("inverse-gamma hyperparameters must be > 0");
  }
  if (!(h.a0 > 0) || !(h.gamma > 0)) throw ConfigError("a0 and gamma must be > 0");
  if (prior == PriorFamily::AopFixed) {
    if (K > 1 && h.fixed_tau.size() != 1 && h.fixed_tau.size() != static_cast<std::size_t>(K - 1)) {
      throw ConfigError("aop-fixed needs one or K-1 tau^2 values");
    }
    for (double t : h.fixed_tau) {
      if (!(t > 0.0)) throw ConfigError("fixed tau^2 values must be > 0");
    }
  }
}

double GibbsState::tau_for_level(int k) const {
  if (tau_sqs.size() == 1) return tau_sqs[0];
  return tau_sqs.at(static_cast<std::size_t>(k - 1));
}

bool GibbsState::all_finite() const {
  if (!betas.allFinite() || !scores.allFinite() || !lambdas.allFinite() || !std::isfinite(sigma_sq)) return false;
  if (!(sigma_sq > 0.0) || !(lambdas.array() > 0.0).all()) return false;
  for (double t : tau_sqs) {
    if (!std::isfinite(t) || !(t > 0.0)) return false;
  }
  if (shrink) {
    if (!shrink->local.allFinite() || !std::isfinite(shrink->global)) return false;
  }
  return true;
}

FpcaModel::FpcaModel(const FunctionalDataset& data, const BasisSystem& basis, int K, PriorFamily prior, Hyper hyper)
    : basis_(basis), K_(K), L_(basis.size()), prior_(prior), hyper_(std::move(hyper)) {
  if (K_ < 1 || K_ > L_) {
    throw ConfigError("need 1 <= K <= L, got K=" + std::to_string(K_) + " L=" + std::to_string(L_));
  }
  data.validate(basis.domain());
  std::map<std::vector<double>, int> group_of;
  curves_.reserve(data.size());
  for (const auto& c : data.curves) {
    auto [it, inserted] = group_of.try_emplace(c.times, static_cast<int>(groups_.size()));
    if (inserted) {
      GridGroup g;
      g.design = basis.evaluate(c.times);
      g.cross = g.design.transpose() * g.design;
      groups_.push_back(std::move(g));
    }
    CurveData cd;
    cd.group = it->second;
    cd.values = Eigen::Map<const Eigen::VectorXd>(c.values.data(), static_cast<Eigen::Index>(c.values.size()));
    cd.projected = groups_[static_cast<std::size_t>(cd.group)].design.transpose() * cd.values;
    curves_.push_back(std::move(cd));
    total_points_ += c.size();
  }
}

GibbsState FpcaModel::initial_state(Rng& rng, double beta_var) const {
  GibbsState s;
  s.betas.resize(K_, L_);
  for (int k = 0; k < K_; ++k) s.betas.row(k) = std::sqrt(beta_var) * rng.normal_vector(L_).transpose();
  s.scores = Eigen::MatrixXd::Zero(n(), K_);
  s.lambdas = Eigen::VectorXd::Ones(K_);
  s.sigma_sq = 1.0;
  const double b0 = hyper_.resolved_b0(K_);
  const double tau_mean = hyper_.a0 > 1.0 ? b0 / (hyper_.a0 - 1.0) : 1.0 / (static_cast<double>(K_) * K_);
  switch (prior_) {
    case PriorFamily::AopGlobal: s.tau_sqs = {tau_mean}; break;
    case PriorFamily::AopLocal: s.tau_sqs.assign(static_cast<std::size_t>(std::max(K_ - 1, 0)), tau_mean); break;
    case PriorFamily::AopFixed: s.tau_sqs = expand_tau(hyper_.fixed_tau, K_); break;
    case PriorFamily::NOS: {
      HorseshoeState h;
      h.local = Eigen::MatrixXd::Ones(K_, L_);
      h.local_aux = Eigen::MatrixXd::Ones(K_, L_);
      s.shrink = std::move(h);
      break;
    }
    case PriorFamily::NO: break;
  }
  return s;
}

Eigen::MatrixXd FpcaModel::prior_precision(const GibbsState& s, int k) const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(L_, L_);
  switch (prior_) {
    case PriorFamily::NO:
      p.diagonal().setConstant(1.0 / hyper_.gamma);
      break;
    case PriorFamily::NOS:
      p.diagonal() = (s.shrink->global * s.shrink->local.row(k).transpose().array()).inverse().matrix();
      break;
    default: {
      // H_k^T H_k / gamma: H_1 = I, otherwise the last L-k+1 coordinates (1-based k).
      p.diagonal().tail(L_ - k).setConstant(1.0 / hyper_.gamma);
      const Eigen::MatrixXd& omega = basis_.gram().omega;
      for (int j = 0; j < K_; ++j) {
        if (j == k) continue;
        const double tau_sq = s.tau_for_level(std::max(j, k));
        const Eigen::VectorXd w = omega * s.betas.row(j).transpose();
        p.noalias() += (w * w.transpose()) / tau_sq;
      }
      break;
    }
  }
  return p;
}

GaussianInfo FpcaModel::beta_conditional(const GibbsState& s, int k) const {
  GaussianInfo info;
  info.precision = prior_precision(s, k);
  info.shift = Eigen::VectorXd::Zero(L_);  // prior mean term vanishes: b_0k = 0
  const double inv_sigma = 1.0 / s.sigma_sq;

  std::vector<double> z2(groups_.size(), 0.0);
  std::vector<Eigen::VectorXd> resid(groups_.size(), Eigen::VectorXd::Zero(L_));
  const Eigen::VectorXd beta_k = s.betas.row(k).transpose();
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    const double z = s.scores(static_cast<Eigen::Index>(i), k);
    if (z == 0.0) continue;
    const auto& c = curves_[i];
    // other components' fitted coefficient combination: sum_{l != k} Z_il beta_l
    const Eigen::VectorXd others =
        s.betas.transpose() * s.scores.row(static_cast<Eigen::Index>(i)).transpose() - z * beta_k;
    z2[static_cast<std::size_t>(c.group)] += z * z;
    info.shift.noalias() += z * c.projected;
    resid[static_cast<std::size_t>(c.group)].noalias() += z * others;
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (z2[g] == 0.0) continue;
    info.precision.noalias() += (inv_sigma * z2[g]) * groups_[g].cross;
    info.shift.noalias() -= groups_[g].cross * resid[g];
  }
  info.shift *= inv_sigma;
  // restore exact symmetry lost to accumulation order
  info.precision = (0.5 * (info.precision + info.precision.transpose())).eval();
  return info;
}

void FpcaModel::update_beta(GibbsState& s, int k, Rng& rng) const {
  const auto info = beta_conditional(s, k);
  s.betas.row(k) = sample_mvn_precision(rng, info.precision, info.shift).transpose();
}

std::pair<double, double> FpcaModel::score_conditional(const GibbsState& s, int i, int k) const {
  const auto& c = curves_[static_cast<std::size_t>(i)];
  const auto& g = groups_[static_cast<std::size_t>(c.group)];
  const Eigen::VectorXd beta_k = s.betas.row(k).transpose();
  const Eigen::VectorXd cb = g.cross * beta_k;
  const double ff = beta_k.dot(cb);
  // F_ik^T (X_i - sum_{l != k} Z_il F_il)
  double fr = beta_k.dot(c.projected);
  for (int l = 0; l < K_; ++l) {
    if (l == k) continue;
    fr -= s.scores(i, l) * cb.dot(s.betas.row(l).transpose());
  }
  const double var = 1.0 / (ff / s.sigma_sq + 1.0 / s.lambdas(k));
  return {var * fr / s.sigma_sq, var};
}

void FpcaModel::update_scores(GibbsState& s, Rng& rng) const {
  // Per grid group: C = B G B^T (K x K) and per curve d = B design^T X.
  std::vector<Eigen::MatrixXd> cross_k(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) cross_k[g] = s.betas * groups_[g].cross * s.betas.transpose();
  for (int i = 0; i < n(); ++i) {
    const auto& c = curves_[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd& ck = cross_k[static_cast<std::size_t>(c.group)];
    const Eigen::VectorXd d = s.betas * c.projected;
    for (int k = 0; k < K_; ++k) {
      double fr = d(k);
      for (int l = 0; l < K_; ++l) {
        if (l != k) fr -= s.scores(i, l) * ck(k, l);
      }
      const double var = 1.0 / (ck(k, k) / s.sigma_sq + 1.0 / s.lambdas(k));
      s.scores(i, k) = var * fr / s.sigma_sq + std::sqrt(var) * rng.normal();
    }
  }
}

std::pair<double, double> FpcaModel::lambda_conditional(const GibbsState& s, int k) const {
  return {hyper_.a_lambda + 0.5 * n(), hyper_.b_lambda + 0.5 * s.scores.col(k).squaredNorm()};
}

void FpcaModel::update_lambda(GibbsState& s, Rng& rng) const {
  for (int k = 0; k < K_; ++k) {
    const auto [shape, scale] = lambda_conditional(s, k);
    s.lambdas(k) = rng.inv_gamma(shape, scale);
  }
}

std::pair<double, double> FpcaModel::tau_conditional(const GibbsState& s, int k) const {
  const Eigen::MatrixXd& omega = basis_.gram().omega;
  const double a0 = hyper_.a0;
  const double b0 = hyper_.resolved_b0(K_);
  auto pair_sum = [&](int level) {
    double acc = 0.0;
    const Eigen::VectorXd w = omega * s.betas.row(level).transpose();
    for (int j = 0; j < level; ++j) {
      const double ip = s.betas.row(j).dot(w);
      acc += ip * ip;
    }
    return acc;
  };
  if (prior_ == PriorFamily::AopGlobal) {
    double ss = 0.0;
    for (int level = 1; level < K_; ++level) ss += pair_sum(level);
    return {a0 + 0.25 * K_ * (K_ - 1), b0 + 0.5 * ss};
  }
  return {a0 + 0.5 * k, b0 + 0.5 * pair_sum(k)};
}

void FpcaModel::update_tau(GibbsState& s, Rng& rng) const {
  if (prior_ == PriorFamily::AopGlobal) {
    const auto [shape, scale] = tau_conditional(s, 0);
    s.tau_sqs.assign(1, rng.inv_gamma(shape, scale));
  } else if (prior_ == PriorFamily::AopLocal) {
    for (int k = 1; k < K_; ++k) {
      const auto [shape, scale] = tau_conditional(s, k);
      s.tau_sqs[static_cast<std::size_t>(k - 1)] = rng.inv_gamma(shape, scale);
    }
  }
}

double FpcaModel::residual_sum_squares(const GibbsState& s) const {
  double rss = 0.0;
  for (int i = 0; i < n(); ++i) {
    const auto& c = curves_[static_cast<std::size_t>(i)];
    const Eigen::VectorXd coef = s.betas.transpose() * s.scores.row(i).transpose();
    rss += (c.values - groups_[static_cast<std::size_t>(c.group)].design * coef).squaredNorm();
  }
  return rss;
}

std::pair<double, double> FpcaModel::sigma_conditional(const GibbsState& s) const {
  return {hyper_.a_sigma + 0.5 * static_cast<double>(total_points_), hyper_.b_sigma + 0.5 * residual_sum_squares(s)};
}

void FpcaModel::update_sigma(GibbsState& s, Rng& rng) const {
  const auto [shape, scale] = sigma_conditional(s);
  s.sigma_sq = rng.inv_gamma(shape, scale);
}

void FpcaModel::update_horseshoe(GibbsState& s, Rng& rng) const {
  if (!s.shrink) throw ConfigError("horseshoe update requires the NO-S prior");
  HorseshoeState& h = *s.shrink;
  double weighted = 0.0;
  for (int k = 0; k < K_; ++k) {
    for (int l = 0; l < L_; ++l) {
      const double b2 = s.betas(k, l) * s.betas(k, l);
      h.local(k, l) = rng.inv_gamma(1.0, 1.0 / h.local_aux(k, l) + 0.5 * b2 / h.global);
      h.local_aux(k, l) = rng.inv_gamma(1.0, 1.0 + 1.0 / h.local(k, l));
      weighted += b2 / h.local(k, l);
    }
  }
  h.global = rng.inv_gamma(0.5 * (K_ * L_ + 1), 1.0 / h.global_aux + 0.5 * weighted);
  h.global_aux = rng.inv_gamma(1.0, 1.0 + 1.0 / h.global);
}

void FpcaModel::sweep(GibbsState& s, Rng& rng, const FrozenBlocks& frozen) const {
  if (!frozen.betas) {
    for (int k = 0; k < K_; ++k) update_beta(s, k, rng);
  }
  if (!frozen.scores) update_scores(s, rng);
  if (!frozen.lambdas) update_lambda(s, rng);
  if (!frozen.tau && (prior_ == PriorFamily::AopGlobal || prior_ == PriorFamily::AopLocal)) update_tau(s, rng);
  if (!frozen.shrinkage && prior_ == PriorFamily::NOS) update_horseshoe(s, rng);
  if (!frozen.sigma) update_sigma(s, rng);
}

double FpcaModel::log_joint(const GibbsState& s) const {
  const double N = static_cast<double>(total_points_);
  double lp = -0.5 * N * (kLog2Pi + std::log(s.sigma_sq)) - 0.5 * residual_sum_squares(s) / s.sigma_sq;
  lp += log_inv_gamma_kernel(s.sigma_sq, hyper_.a_sigma, hyper_.b_sigma);
  for (int k = 0; k < K_; ++k) {
    const double lam = s.lambdas(k);
    lp += -0.5 * n() * (kLog2Pi + std::log(lam)) - 0.5 * s.scores.col(k).squaredNorm() / lam;
    lp += log_inv_gamma_kernel(lam, hyper_.a_lambda, hyper_.b_lambda);
  }
  switch (prior_) {
    case PriorFamily::NO:
      lp += -0.5 * s.betas.squaredNorm() / hyper_.gamma;
      break;
    case PriorFamily::NOS: {
      const auto& h = *s.shrink;
      const Eigen::ArrayXXd var = h.global * h.local.array();
      lp += -0.5 * (s.betas.array().square() / var + var.log()).sum();
      break;
    }
    default: {
      const Eigen::MatrixXd& omega = basis_.gram().omega;
      lp += -0.5 * s.betas.row(0).squaredNorm() / hyper_.gamma;
      for (int k = 1; k < K_; ++k) {
        const double tau_sq = s.tau_for_level(k);
        const Eigen::VectorXd w = omega * s.betas.row(k).transpose();
        for (int j = 0; j < k; ++j) {
          const double ip = s.betas.row(j).dot(w);
          lp += -0.5 * ip * ip / tau_sq;
        }
        lp += -0.5 * s.betas.row(k).tail(L_ - k).squaredNorm() / hyper_.gamma;
      }
      const double b0 = hyper_.resolved_b0(K_);
      if (prior_ == PriorFamily::AopGlobal) {
        lp += -0.25 * K_ * (K_ - 1) * std::log(s.tau_sqs[0]) + log_inv_gamma_kernel(s.tau_sqs[0], hyper_.a0, b0);
      } else if (prior_ == PriorFamily::AopLocal) {
        for (int k = 1; k < K_; ++k) {
          const double t = s.tau_sqs[static_cast<std::size_t>(k - 1)];
          lp += -0.5 * k * std::log(t) + log_inv_gamma_kernel(t, hyper_.a0, b0);
        }
      }
      break;
    }
  }
  return lp;
}

Eigen::MatrixXd PosteriorDraws::beta_draw(long d) const {
  const auto offset = static_cast<std::size_t>(d) * static_cast<std::size_t>(K * L);
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      betas.data() + offset, K, L);
}

Eigen::VectorXd PosteriorDraws::lambda_mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(K);
  for (long d = 0; d < draw_count; ++d) {
    for (int k = 0; k < K; ++k) m(k) += lambdas[static_cast<std::size_t>(d * K + k)];
  }
  return draw_count > 0 ? Eigen::VectorXd(m / static_cast<double>(draw_count)) : m;
}

std::vector<double> PosteriorDraws::tau_mean() const {
  std::vector<double> m(static_cast<std::size_t>(n_tau), 0.0);
  for (long d = 0; d < draw_count; ++d) {
    for (int t = 0; t < n_tau; ++t) m[static_cast<std::size_t>(t)] += tau_sqs[static_cast<std::size_t>(d * n_tau + t)];
  }
  for (double& v : m) v /= static_cast<double>(std::max(draw_count, 1L));
  return m;
}

double PosteriorDraws::sigma_sq_mean() const {
  if (sigma_sqs.empty()) return std::nan("");
  return std::accumulate(sigma_sqs.begin(), sigma_sqs.end(), 0.0) / static_cast<double>(sigma_sqs.size());
}

namespace {

// Reorders components by decreasing posterior-mean norm and fixes signs, in place.
void relabel(PosteriorDraws& out, const BasisSystem& basis) {
  const int K = out.K;
  const int L = out.L;
  const GramMatrix& gram = basis.gram();
  std::vector<double> norms(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) norms[static_cast<std::size_t>(k)] = function_norm_sq(out.beta_mean.row(k).transpose(), gram);
  out.order.resize(static_cast<std::size_t>(K));
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](int a, int b) { return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)]; });

  const Eigen::VectorXd phi_mid = basis.evaluate(0.5 * (basis.domain().lower + basis.domain().upper));
  out.signs.assign(static_cast<std::size_t>(K), 1);
  Eigen::MatrixXd mean(K, L);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd b = out.beta_mean.row(out.order[static_cast<std::size_t>(k)]).transpose();
    const double mid = b.dot(phi_mid);
    int sign = 1;
    if (mid < 0.0) {
      sign = -1;
    } else if (mid == 0.0) {
      for (Eigen::Index l = 0; l < b.size(); ++l) {
        if (b(l) != 0.0) {
          sign = b(l) > 0.0 ? 1 : -1;
          break;
        }
      }
    }
    out.signs[static_cast<std::size_t>(k)] = sign;
    mean.row(k) = sign * b.transpose();
  }
  out.beta_mean = mean;

  auto permute_block = [&](std::vector<double>& flat, int rows, bool by_column) {
    // by_column: per-draw n x K block, components are columns; otherwise K x L, components are rows.
    const std::size_t block = static_cast<std::size_t>(rows) * static_cast<std::size_t>(by_column ? K : L);
    std::vector<double> tmp(block);
    for (long d = 0; d < out.draw_count; ++d) {
      double* base = flat.data() + static_cast<std::size_t>(d) * block;
      std::copy(base, base + block, tmp.begin());
      for (int k = 0; k < K; ++k) {
        const int src = out.order[static_cast<std::size_t>(k)];
        const double sign = out.signs[static_cast<std::size_t>(k)];
        if (by_column) {
          for (int i = 0; i < rows; ++i) base[i * K + k] = sign * tmp[static_cast<std::size_t>(i * K + src)];
        } else {
          for (int l = 0; l < L; ++l) base[k * L + l] = sign * tmp[static_cast<std::size_t>(src * L + l)];
        }
      }
    }
  };
  permute_block(out.betas, K, false);
  if (out.has_scores) permute_block(out.scores, out.n, true);
  std::vector<double> tmp(static_cast<std::size_t>(K));
  for (long d = 0; d < out.draw_count; ++d) {
    double* base = out.lambdas.data() + static_cast<std::size_t>(d * K);
    std::copy(base, base + K, tmp.begin());
    for (int k = 0; k < K; ++k) base[k] = tmp[static_cast<std::size_t>(out.order[static_cast<std::size_t>(k)])];
  }
}

}  // namespace

PosteriorDraws run_gibbs(const FunctionalDataset& data, const BasisSystem& basis, int K, const GibbsConfig& config,
                         const std::optional<GibbsState>& initial) {
  config.validate(K, basis.size());
  if (data.size() == 0) throw ConfigError("dataset is empty");
  const FpcaModel model(data, basis, K, config.prior, config.hyper);
  Rng rng(config.seed);
  GibbsState state = initial ? *initial : model.initial_state(rng, config.init_beta_var);
  if (state.betas.rows() != K || state.betas.cols() != basis.size() || state.scores.rows() != model.n() ||
      state.scores.cols() != K || state.lambdas.size() != K) {
    throw DimensionError("initial state shape does not match the model");
  }

  PosteriorDraws out;
  out.K = K;
  out.L = basis.size();
  out.n = model.n();
  out.prior = config.prior;
  out.n_tau = static_cast<int>(state.tau_sqs.size());
  out.has_scores = config.keep_scores;
  const long expected = config.n_iter / config.thin;
  out.betas.reserve(static_cast<std::size_t>(expected * K * out.L));
  if (out.has_scores) out.scores.reserve(static_cast<std::size_t>(expected * out.n * K));

  const long total = config.n_burnin + config.n_iter;
  for (long sweep = 0; sweep < total; ++sweep) {
    try {
      model.sweep(state, rng, config.frozen);
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), sweep);
    }
    if (!state.all_finite()) throw NumericalError(dump_state(state), sweep);
    const long post = sweep - config.n_burnin;
    if (post < 0 || (post + 1) % config.thin != 0) continue;

    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> b = state.betas;
    out.betas.insert(out.betas.end(), b.data(), b.data() + b.size());
    if (out.has_scores) {
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z = state.scores;
      out.scores.insert(out.scores.end(), z.data(), z.data() + z.size());
    }
    out.lambdas.insert(out.lambdas.end(), state.lambdas.data(), state.lambdas.data() + K);
    out.tau_sqs.insert(out.tau_sqs.end(), state.tau_sqs.begin(), state.tau_sqs.end());
    out.sigma_sqs.push_back(state.sigma_sq);
    if (config.track_log_joint) out.log_joint.push_back(model.log_joint(state));
    ++out.draw_count;
  }

  out.beta_mean = Eigen::MatrixXd::Zero(K, out.L);
  for (long d = 0; d < out.draw_count; ++d) out.beta_mean += out.beta_draw(d);
  out.beta_mean /= static_cast<double>(out.draw_count);
  relabel(out, basis);
  return out;
}

FunctionSummary summarize_functions(const PosteriorDraws& draws, const BasisSystem& basis, int grid_points) {
  if (grid_points < 2) throw ConfigError("summary grid needs at least 2 points");
  FunctionSummary s;
  const Domain& d = basis.domain();
  for (int g = 0; g < grid_points; ++g) {
    s.grid.push_back(d.lower + d.length() * static_cast<double>(g) / static_cast<double>(grid_points - 1));
  }
  s.grid.back() = d.upper;
  const Eigen::MatrixXd phi = basis.evaluate(s.grid);  // G x L
  s.mean = phi * draws.beta_mean.transpose();
  s.lower.resize(grid_points, draws.K);
  s.upper.resize(grid_points, draws.K);
  std::vector<Eigen::MatrixXd> values;  // per draw: G x K
  values.reserve(static_cast<std::size_t>(draws.draw_count));
  for (long dd = 0; dd < draws.draw_count; ++dd) values.push_back(phi * draws.beta_draw(dd).transpose());
  std::vector<double> buf(static_cast<std::size_t>(draws.draw_count));
  for (int g = 0; g < grid_points; ++g) {
    for (int k = 0; k < draws.K; ++k) {
      for (long dd = 0; dd < draws.draw_count; ++dd) buf[static_cast<std::size_t>(dd)] = values[static_cast<std::size_t>(dd)](g, k);
      std::sort(buf.begin(), buf.end());
      s.lower(g, k) = quantile_sorted(buf, 0.025);
      s.upper(g, k) = quantile_sorted(buf, 0.975);
    }
  }
  return s;
}

}  // namespace aop
