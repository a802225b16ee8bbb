#include "scl/estimator.hpp"

#include "scl/inference.hpp"

#include <cmath>

namespace scl {

FitResult fit(const Model& model, const Dataset& data, const ComponentSet& comps, const IndicatorMatrix& z,
              const FitConfig& config, const Vector* theta_init) {
  if (config.sigma2 && !(*config.sigma2 > 0.0)) throw ContractError("sigma2 must be positive");
  SclObjective objective(model, data, comps, z);
  const double penalty = config.sigma2 ? 1.0 / (2.0 * *config.sigma2 * static_cast<double>(data.size())) : 0.0;
  Objective f = [&](const Vector& theta, Vector& grad) {
    double v = objective.value_and_gradient(theta, grad);
    if (penalty > 0.0) {
      v -= penalty * theta.squaredNorm();
      grad -= 2.0 * penalty * theta;
    }
    return v;
  };
  OptimizerConfig oc;
  oc.method = config.method;
  oc.max_iterations = config.max_iterations;
  oc.gradient_tolerance = config.gradient_tolerance;
  oc.line_search = config.line_search;
  oc.lbfgs_memory = config.lbfgs_memory;
  Vector x0 = theta_init ? *theta_init : Vector::Zero(model.num_params());
  model.validate_theta(x0);
  OptimizerResult opt = maximize(f, x0, oc);

  FitResult res;
  res.theta_hat = std::move(opt.x);
  res.objective_trace = std::move(opt.trace);
  res.converged = opt.converged;
  res.gradient_norm = opt.gradient_norm;
  res.iterations = opt.iterations;
  res.evaluations = opt.evaluations;
  res.objective = opt.value;
  res.ledger = objective.ledger();
  res.flops_total = static_cast<std::uint64_t>(opt.evaluations) * res.ledger.gradient_total;
  return res;
}

AutoBetaResult fit_auto_beta(const Model& model, const Dataset& data, const ComponentSet& comps,
                             const SelectionPolicy& policy, const FitConfig& config,
                             const AutoBetaConfig& auto_config) {
  if (policy.size() != comps.size()) throw DimensionError("policy and component set sizes differ");
  AutoBetaResult res;
  res.z = draw_indicators(policy, data.size(), config.seed);
  res.beta = comps.beta();
  res.fit = fit(model, data, comps, res.z, config);
  if (comps.size() == 1) {
    res.converged = res.fit.converged;
    res.rounds = 1;
    return res;
  }
  ScoreCovOptions opts;
  if (auto_config.mode == JMode::diagonal) opts.max_score_entries = 0;
  for (int round = 0; round < auto_config.max_outer; ++round) {
    ScoreCov cov = score_cov(model, res.fit.theta_hat, comps, data, opts);
    BetaObjective obj{&cov, policy, auto_config.mode, SigmaVariant::formula, auto_config.gamma};
    BetaResult b = optimize_beta(obj, res.beta, auto_config.constraints);
    res.j_before.push_back(b.j_init);
    res.j_after.push_back(b.j_final);
    res.beta = b.beta;
    const Vector previous = res.fit.theta_hat;
    res.fit = fit(model, data, comps.with_beta(res.beta), res.z, config, &previous);
    res.rounds = round + 1;
    if ((res.fit.theta_hat - previous).cwiseAbs().maxCoeff() <= auto_config.theta_tolerance) {
      res.converged = res.fit.converged;
      break;
    }
  }
  return res;
}

double mean_log_likelihood(const Model& model, const Vector& theta, const Dataset& data) {
  if (data.empty()) throw ContractError("dataset is empty");
  double s = 0.0;
  if (model.is_chain()) {
    ChainPotentials pot(model, theta);
    for (const auto& x : data.samples) {
      model.validate(x);
      s += chain_window(pot, x, 0, model.sequence_length(x), 1.0, nullptr);
    }
  } else {
    const auto g = model.graph();
    const double logz = log_partition_enumerate(*g, theta);
    for (const auto& x : data.samples) {
      model.validate(x);
      s += g->score(theta, x.values) - logz;
    }
  }
  return s / static_cast<double>(data.size());
}

}  // namespace scl
