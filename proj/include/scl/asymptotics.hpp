#pragma once

#include "scl/components.hpp"
#include "scl/optimizer.hpp"
#include "scl/policy.hpp"

#include <functional>
#include <optional>

namespace scl {

enum class CovSource { exact, empirical, true_distribution };

/// Cross-covariances K^(ij) = Cov(grad S(A_i,B_i), grad S(A_j,B_j)) of the
/// component scores. Per-configuration scores are kept when N * k * r is at
/// most `max_score_entries`, so any block can be formed; the diagonals of
/// every block are always kept.
class ScoreCov {
 public:
  int num_components() const { return k_; }
  int num_params() const { return r_; }
  CovSource source() const { return source_; }
  bool has_cross() const { return scores_.size() > 0; }
  bool centered() const { return centered_; }

  /// K^(ij); requires has_cross().
  Matrix block(int i, int j) const;
  /// diag(K^(ij)).
  Vector block_diagonal(int i, int j) const;

  /// sum_j w_j K^(jj).
  Matrix weighted_diagonal_blocks(const Vector& w) const;
  /// sum_ij W_ij K^(ij).
  Matrix weighted_blocks(const Matrix& W) const;
  Vector weighted_diagonal_blocks_diag(const Vector& w) const;
  Vector weighted_blocks_diag(const Matrix& W) const;

  /// Var(f(X)) under the distribution the scores were taken over, when the
  /// full likelihood is defined there (exact mode).
  const std::optional<Matrix>& fisher() const { return fisher_; }
  const std::vector<std::string>& param_names() const { return names_; }

 private:
  friend class ScoreCovBuilder;
  int k_ = 0;
  int r_ = 0;
  CovSource source_ = CovSource::exact;
  bool centered_ = true;
  Matrix scores_;  // N x (k r), rows scaled by sqrt(p_n)
  Matrix mean_;    // k x r
  Matrix diag_;  // row i * k + j holds diag(K^(ij))
  std::optional<Matrix> fisher_;
  std::vector<std::string> names_;
};

struct ScoreCovOptions {
  long long max_score_entries = 1LL << 24;
  /// Subtract the score means. Off for raw second moments E[g_i g_j^T].
  bool center = true;
};

/// Exact: sums over every configuration of a fixed-size model, weighted by
/// p_theta0. For a Boltzmann chain, `shape` fixes the sequence length.
ScoreCov score_cov(const Model& model, const Vector& theta0, const ComponentSet& comps,
                   const ScoreCovOptions& options = {}, const Sample* shape = nullptr);
/// Empirical: averages over the samples of `data` with theta0 as plug-in.
ScoreCov score_cov(const Model& model, const Vector& theta0, const ComponentSet& comps, const Dataset& data,
                   const ScoreCovOptions& options = {});

/// An explicit distribution over assignments of a fixed-size model.
struct TrueDistribution {
  std::vector<Sample> support;
  std::vector<double> prob;

  static TrueDistribution from_model(const Model& model, const Vector& theta);
  /// Normalizes exp(log_weight(x)) over every configuration with the given cardinalities.
  static TrueDistribution from_log_weights(const std::vector<int>& cards,
                                           const std::function<double(const std::vector<int>&)>& log_weight);
};

/// Scores weighted by an explicit distribution.
ScoreCov score_cov(const Model& model, const Vector& theta0, const ComponentSet& comps,
                   const TrueDistribution& truth, const ScoreCovOptions& options = {});

struct AsymReport {
  Matrix upsilon_inv;  // sum_j beta_j lambda_j K^(jj)
  // Sigma = Var(sum_j beta_j lambda_j grad S_j), as written for deterministic weights.
  Matrix sigma;
  Matrix variance;  // Upsilon Sigma Upsilon
  double trace = 0.0;
  double log_det = 0.0;
  // Sigma with the policy's second moments: sum_ij beta_i beta_j E[Z_i Z_j] K^(ij).
  Matrix sigma_selection;
  Matrix variance_selection;
  double trace_selection = 0.0;
  double log_det_selection = 0.0;
  // Relative to I^-1 when the score covariance carries the Fisher information.
  std::optional<double> eff, eff_trace, eff_selection, eff_trace_selection;
};

/// Throws SingularError naming the null directions when Upsilon^-1 is singular.
AsymReport asymptotic_variance(const ScoreCov& cov, const SelectionPolicy& policy, const Vector& beta);

struct EfficiencyRatio {
  double determinant = 0.0;  // det(variance) / det(mle_variance)
  double trace = 0.0;
};

/// Ratios against the MLE variance; the determinant ratio is taken in log space.
EfficiencyRatio efficiency(const Matrix& variance, const Matrix& mle_variance);
double efficiency(const AsymReport& report, const Matrix& mle_variance);

/// I^-1 from a ScoreCov that carries the Fisher information.
Matrix mle_variance(const ScoreCov& cov);

/// log det of a symmetric positive definite matrix via eigenvalues; throws if not PD.
double log_det_spd(const Matrix& m, const std::string& what);

struct RobustReport {
  Model model;
  ComponentSet components;
  SelectionPolicy policy;
  Vector theta0;
  Matrix bread;  // E_P E_Z psi-dot
  Matrix meat;   // E_P E_Z psi psi^T
  Matrix sandwich;
  double residual = 0.0;  // sup-norm of E_P E_Z psi at theta0
};

/// theta0 maximizes E_P E_Z sum_j beta_j Z_j log p(x_A | x_B); returns the
/// sandwich bread^-1 meat bread^-1 there.
RobustReport sandwich_variance(const Model& model, const ComponentSet& comps, const SelectionPolicy& policy,
                               const TrueDistribution& truth, double tolerance = 1e-9);

/// -(1/n) bread^-1 psi_theta0(x, z).
Vector influence(const RobustReport& robust, const Sample& x, const std::vector<std::uint8_t>& z, std::size_t n);

}  // namespace scl
