#pragma once

#include "scl/components.hpp"
#include "scl/inference.hpp"
#include "scl/policy.hpp"

#include <optional>

namespace scl {

/// Floating-point-operation counts for one objective evaluation.
///
/// Cost model for an m-pair (A, B) over a fixed-size model with r parameters:
///   objective = T * q + r + |B|,  gradient = objective + T * q + r
/// where T is the size of the enumerated table over A and the marginalized
/// variables and q the number of factors touching them. On the 5-node
/// Boltzmann machine this gives 330 (FL), 22 (PL1) and 41 (PL2) per sample.
/// A chain window of length L with S states costs L * S^2 + sum_t S * e_t
/// plus one per boundary transition, with e_t the emission terms per state at
/// position t; its gradient adds the backward pass, L * S^2 + sum_t S * e_t.
struct FlopLedger {
  std::vector<std::uint64_t> per_component;
  std::vector<std::uint64_t> per_sample;
  std::uint64_t objective_total = 0;
  std::uint64_t gradient_total = 0;
};

/// theta with the per-theta caches chain models need.
struct ThetaContext {
  ThetaContext(const Model& model, const Vector& theta);
  const Vector& theta;
  std::optional<ChainPotentials> chain;
};

/// Evaluates single likelihood objects S(A_j, B_j) on single samples.
class ComponentEvaluator {
 public:
  ComponentEvaluator(Model model, ComponentSet comps);

  const Model& model() const { return model_; }
  const ComponentSet& components() const { return comps_; }

  /// log p(x_A | x_B) for component j (summed over windows for chain
  /// templates). Adds weight * gradient into *grad and weight * Hessian into
  /// *hess when non-null. Chain gradients go through `acc` when given (the
  /// caller then finalizes it); Hessians are available for fixed-size models.
  double evaluate(const ThetaContext& ctx, int j, const Sample& x, double weight, Vector* grad, Matrix* hess,
                  ChainAccumulator* acc = nullptr) const;

  std::uint64_t objective_cost(int j, const Sample& x) const;
  std::uint64_t gradient_cost(int j, const Sample& x) const;

 private:
  std::vector<std::pair<int, int>> windows(int j, const Sample& x) const;
  Model model_;
  ComponentSet comps_;
  std::vector<ConditionalKernel> kernels_;
};

/// The SCL objective (1/n) sum_i sum_j beta_j Z_ij log p(X_i,A_j | X_i,B_j) for
/// fixed data and indicators. Identical (sample, indicator row) pairs are
/// evaluated once and weighted by their multiplicity; partial sums are
/// reduced in a fixed order, so results are bitwise reproducible.
class SclObjective {
 public:
  SclObjective(Model model, const Dataset& data, ComponentSet comps, const IndicatorMatrix& z);

  double value(const Vector& theta) const;
  double value_and_gradient(const Vector& theta, Vector& grad) const;
  /// Hessian of value(); fixed-size models only.
  Matrix hessian(const Vector& theta) const;

  int num_params() const { return evaluator_.model().num_params(); }
  std::size_t num_samples() const { return n_; }
  const ComponentEvaluator& evaluator() const { return evaluator_; }
  const FlopLedger& ledger() const { return ledger_; }

 private:
  struct Group {
    Sample sample;
    std::vector<int> selected;
    double count = 0.0;
  };
  double run(const Vector& theta, Vector* grad, Matrix* hess) const;

  ComponentEvaluator evaluator_;
  std::vector<Group> groups_;
  std::size_t n_ = 0;
  FlopLedger ledger_;
};

double scl_value(const Model& model, const Vector& theta, const Dataset& data, const ComponentSet& comps,
                 const IndicatorMatrix& z);
Vector scl_gradient(const Model& model, const Vector& theta, const Dataset& data, const ComponentSet& comps,
                    const IndicatorMatrix& z);

/// Deterministic counts for one evaluation under the cost model above.
FlopLedger flop_count(const Model& model, const Dataset& data, const ComponentSet& comps, const IndicatorMatrix& z);
/// Same, for fixed-size models where costs do not depend on the sample.
FlopLedger flop_count(const Model& model, const ComponentSet& comps, const IndicatorMatrix& z);

/// sum_j n * lambda_j * cost_j; fixed-size models.
double expected_flops(const Model& model, const ComponentSet& comps, const SelectionPolicy& policy, std::size_t n);
/// sum_i sum_j lambda_j * cost_j(x_i); any model.
double expected_flops(const Model& model, const Dataset& data, const ComponentSet& comps,
                      const SelectionPolicy& policy);

}  // namespace scl
