#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aop/basis.hpp"
#include "aop/dataset.hpp"
#include "aop/prior.hpp"
#include "aop/random.hpp"

namespace aop {

/// Prior on the principal-function coefficients.
///   NO        beta_k ~ N(0, gamma I)
///   NOS       horseshoe on each coefficient
///   AopGlobal orthogonal prior, one shared tau^2 with IG(a0, b0) hyperprior
///   AopLocal  orthogonal prior, tau_k^2 per level with IG(a0, b0) hyperpriors
///   AopFixed  orthogonal prior with tau_k^2 held at given values
enum class PriorFamily { NO, NOS, AopGlobal, AopLocal, AopFixed };

std::string to_string(PriorFamily p);
/// Accepts no, no-s, aop-g, aop-l, aop-fixed (case-insensitive).
PriorFamily parse_prior_family(std::string_view name);
bool is_orthogonal_prior(PriorFamily p);

struct Hyper {
  double a_lambda = 1.0;
  double b_lambda = 1.0;
  double a_sigma = 1.0;
  double b_sigma = 1.0;
  double a0 = 3.0;
  double b0 = 0.0;  ///< <= 0 selects 2 / K^2
  double gamma = 1.0;
  std::vector<double> fixed_tau;  ///< AopFixed: K-1 values, or one broadcast value

  double resolved_b0(int K) const { return b0 > 0.0 ? b0 : 2.0 / (static_cast<double>(K) * K); }
};

/// Blocks that run_gibbs leaves at their initial values.
struct FrozenBlocks {
  bool betas = false;
  bool scores = false;
  bool lambdas = false;
  bool tau = false;
  bool sigma = false;
  bool shrinkage = false;
};

struct GibbsConfig {
  long n_iter = 3000;    ///< post-burn-in sweeps
  long n_burnin = 2000;
  long thin = 1;
  std::uint64_t seed = 1;
  PriorFamily prior = PriorFamily::AopGlobal;
  Hyper hyper;
  bool keep_scores = true;
  bool track_log_joint = false;
  FrozenBlocks frozen;
  double init_beta_var = 0.1;  ///< initial beta_k ~ N(0, init_beta_var I)

  void validate(int K, int L) const;
};

/// Auxiliary-variable horseshoe state: coefficient (k, l) has prior variance
/// global * local(k, l), with half-Cauchy scales written as inverse-gamma mixtures.
struct HorseshoeState {
  Eigen::MatrixXd local;      // K x L
  Eigen::MatrixXd local_aux;  // K x L
  double global = 1.0;
  double global_aux = 1.0;
};

struct GibbsState {
  Eigen::MatrixXd betas;   // K x L, row k is beta_k
  Eigen::MatrixXd scores;  // n x K
  Eigen::VectorXd lambdas;
  std::vector<double> tau_sqs;  // 1 value (global), K-1 values (local/fixed), empty otherwise
  double sigma_sq = 1.0;
  std::optional<HorseshoeState> shrink;

  int K() const { return static_cast<int>(betas.rows()); }
  /// tau^2 governing constraints of level k (0-based, k >= 1).
  double tau_for_level(int k) const;
  bool all_finite() const;
};

/// Gaussian full conditional in information form: N(precision^{-1} shift, precision^{-1}).
struct GaussianInfo {
  Eigen::MatrixXd precision;
  Eigen::VectorXd shift;

  Eigen::VectorXd mean() const { return precision.llt().solve(shift); }
};

/// Bayesian FPCA model X_i(t) = sum_k Z_ik f_k(t) + eps with f_k = beta_k^T Phi.
/// Holds per-curve precomputations; curves observed on an identical time grid
/// share their design and cross-product matrices.
class FpcaModel {
 public:
  FpcaModel(const FunctionalDataset& data, const BasisSystem& basis, int K, PriorFamily prior, Hyper hyper);

  int K() const { return K_; }
  int L() const { return L_; }
  int n() const { return static_cast<int>(curves_.size()); }
  PriorFamily prior() const { return prior_; }
  const Hyper& hyper() const { return hyper_; }
  const BasisSystem& basis() const { return basis_; }

  /// beta_k ~ N(0, 0.1 I), Z = 0, lambda = 1, sigma^2 = 1, tau^2 = prior mean (or fixed values).
  GibbsState initial_state(Rng& rng, double beta_var = 0.1) const;

  /// Prior precision block for beta_k given the other coefficient vectors.
  Eigen::MatrixXd prior_precision(const GibbsState& s, int k) const;
  GaussianInfo beta_conditional(const GibbsState& s, int k) const;
  /// (mean, variance) of Z_ik given everything else.
  std::pair<double, double> score_conditional(const GibbsState& s, int i, int k) const;

  void update_beta(GibbsState& s, int k, Rng& rng) const;
  void update_scores(GibbsState& s, Rng& rng) const;
  void update_lambda(GibbsState& s, Rng& rng) const;
  void update_tau(GibbsState& s, Rng& rng) const;
  void update_sigma(GibbsState& s, Rng& rng) const;
  void update_horseshoe(GibbsState& s, Rng& rng) const;

  /// One Gibbs sweep: beta_1..beta_K, Z, lambda, tau^2, shrinkage, sigma^2.
  void sweep(GibbsState& s, Rng& rng, const FrozenBlocks& frozen = {}) const;

  double residual_sum_squares(const GibbsState& s) const;
  /// (shape, scale) of the inverse-gamma full conditionals.
  std::pair<double, double> lambda_conditional(const GibbsState& s, int k) const;
  std::pair<double, double> sigma_conditional(const GibbsState& s) const;
  /// Local mode: level k (0-based, k >= 1). Global mode: pooled over all levels (k ignored).
  std::pair<double, double> tau_conditional(const GibbsState& s, int k) const;

  /// Unnormalized log posterior matching the sampler's target.
  double log_joint(const GibbsState& s) const;

 private:
  struct GridGroup {
    Eigen::MatrixXd design;  // m x L
    Eigen::MatrixXd cross;   // design^T design
  };
  struct CurveData {
    int group = 0;
    Eigen::VectorXd values;
    Eigen::VectorXd projected;  // design^T values
  };

  const BasisSystem& basis_;
  int K_;
  int L_;
  PriorFamily prior_;
  Hyper hyper_;
  std::vector<GridGroup> groups_;
  std::vector<CurveData> curves_;
  std::size_t total_points_ = 0;
};

/// Thinned post-burn-in draws, relabelled by decreasing posterior-mean norm and
/// sign-normalized (posterior-mean function >= 0 at the domain midpoint).
struct PosteriorDraws {
  int K = 0;
  int L = 0;
  int n = 0;
  int n_tau = 0;
  PriorFamily prior = PriorFamily::AopGlobal;
  long draw_count = 0;
  bool has_scores = false;

  std::vector<double> betas;     // draw-major, K x L row-major per draw
  std::vector<double> scores;    // draw-major, n x K row-major per draw (if has_scores)
  std::vector<double> lambdas;   // draw-major, K per draw
  std::vector<double> tau_sqs;   // draw-major, n_tau per draw
  std::vector<double> sigma_sqs;
  std::vector<double> log_joint;  // per draw when tracked

  Eigen::MatrixXd beta_mean;        // K x L
  std::vector<int> order;           // order[k] = original component index now at position k
  std::vector<int> signs;           // +1 / -1 applied to the relabelled component k

  Eigen::MatrixXd beta_draw(long d) const;
  Eigen::VectorXd lambda_mean() const;
  std::vector<double> tau_mean() const;
  double sigma_sq_mean() const;
};

PosteriorDraws run_gibbs(const FunctionalDataset& data, const BasisSystem& basis, int K, const GibbsConfig& config,
                         const std::optional<GibbsState>& initial = std::nullopt);

/// Posterior mean functions and pointwise 95% credible bands on a grid.
struct FunctionSummary {
  std::vector<double> grid;
  Eigen::MatrixXd mean;   // grid x K
  Eigen::MatrixXd lower;  // 2.5% quantile
  Eigen::MatrixXd upper;  // 97.5% quantile
};

FunctionSummary summarize_functions(const PosteriorDraws& draws, const BasisSystem& basis, int grid_points = 101);

}  // namespace aop
