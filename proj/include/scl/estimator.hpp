#pragma once

#include "scl/beta_select.hpp"
#include "scl/objective.hpp"
#include "scl/optimizer.hpp"

#include <optional>

namespace scl {

struct FitConfig {
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;
  /// Adds -||theta||^2 / (2 sigma2 n) to the averaged objective.
  std::optional<double> sigma2;
  Method method = Method::automatic;
  LineSearch line_search;
  int lbfgs_memory = 10;
  std::uint64_t seed = 0;  // indicator draws in fit_auto_beta
};

struct FitResult {
  Vector theta_hat;
  std::vector<double> objective_trace;  // regularized objective per iteration
  bool converged = false;
  double gradient_norm = 0.0;  // sup-norm of the regularized gradient
  int iterations = 0;
  int evaluations = 0;
  double objective = 0.0;
  FlopLedger ledger;  // one evaluation
  std::uint64_t flops_total = 0;  // evaluations * gradient_total
};

/// Maximizes the (regularized) SCL from theta = 0, or from *theta_init.
FitResult fit(const Model& model, const Dataset& data, const ComponentSet& comps, const IndicatorMatrix& z,
              const FitConfig& config, const Vector* theta_init = nullptr);

struct AutoBetaConfig {
  double gamma = 1.0;
  int max_outer = 10;
  double theta_tolerance = 1e-4;  // sup-norm change of theta between rounds
  JMode mode = JMode::diagonal;
  BetaConstraints constraints;
};

struct AutoBetaResult {
  FitResult fit;
  Vector beta;
  IndicatorMatrix z;
  /// J before and after each beta update, at the same plug-in theta.
  std::vector<double> j_before;
  std::vector<double> j_after;
  int rounds = 0;
  bool converged = false;
};

/// Alternates theta maximization with beta <- argmin J at the empirical score
/// covariance of the current theta. Indicators are drawn once from `policy`
/// with config.seed. With k = 1 this is a single fit.
AutoBetaResult fit_auto_beta(const Model& model, const Dataset& data, const ComponentSet& comps,
                             const SelectionPolicy& policy, const FitConfig& config,
                             const AutoBetaConfig& auto_config = {});

/// Mean log-likelihood (1/n) sum_i log p_theta(x_i); conditional for a CRF.
double mean_log_likelihood(const Model& model, const Vector& theta, const Dataset& data);

}  // namespace scl
