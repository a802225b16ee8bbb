#pragma once

#include "scl/model.hpp"

namespace scl {

/// log Z(theta). Fixed-size models only; enumerates the joint space.
double log_partition(const Model& model, const Vector& theta);
/// log Z(theta) for the shape of `shape`: chain DP for chain kinds (for a CRF
/// this is log Z(theta; x)), enumeration otherwise.
double log_partition(const Model& model, const Vector& theta, const Sample& shape);
/// Brute-force log-sum-exp over every joint configuration of `graph`.
double log_partition_enumerate(const FactorGraph& graph, const Vector& theta);

/// log p_theta(x) (log p_theta(y|x) for a CRF).
double log_prob(const Model& model, const Vector& theta, const Sample& x);

/// Feature vector f(x); log_prob = <theta, stats> - log Z.
Vector sufficient_stats(const Model& model, const Sample& x);

/// E_theta[f(X)] over the shape of `shape`, by enumeration or chain DP.
Vector expected_stats(const Model& model, const Vector& theta, const Sample& shape);

/// log p_theta(x_A | x_B), marginalizing (A u B)^c. Only the factors touching
/// A u (A u B)^c are evaluated; the rest cancel in the ratio.
double conditional_log_prob(const Model& model, const Vector& theta, const MPair& pair, const Sample& x);

/// Enumeration kernel behind conditional_log_prob. Adds weight * grad log p
/// into *grad and weight * hess log p into *hess when non-null.
double conditional_accumulate(const FactorGraph& graph, const Vector& theta, const MPair& pair,
                              std::span<const int> values, double weight, Vector* grad, Matrix* hess);

/// Size of the enumerated sub-table for (A, B) and the number of factors it touches.
struct SubTable {
  std::uint64_t configurations = 0;
  int factors = 0;
};
SubTable conditional_sub_table(const FactorGraph& graph, const MPair& pair);

/// conditional_accumulate with the (A, B) split resolved once.
class ConditionalKernel {
 public:
  ConditionalKernel(std::shared_ptr<const FactorGraph> graph, MPair pair);

  double accumulate(const Vector& theta, std::span<const int> values, double weight, Vector* grad,
                    Matrix* hess) const;
  const MPair& pair() const { return pair_; }
  SubTable sub_table() const { return {total_, static_cast<int>(factors_.size())}; }

 private:
  std::shared_ptr<const FactorGraph> graph_;
  MPair pair_;
  std::vector<int> summed_;  // A then the marginalized complement
  std::vector<int> factors_;
  std::uint64_t total_ = 0;
};

/// Per-theta cache of chain quantities shared across windows.
class ChainPotentials {
 public:
  ChainPotentials(const Model& model, const Vector& theta);

  const Model& model() const { return model_; }
  const Vector& theta() const { return theta_; }
  /// Boltzmann chain: log sum_v exp(B[s, v]).
  double emission_log_norm(int s) const { return emission_lse_[s]; }
  double transition(int a, int b) const { return theta_[model_.transition_param(a, b)]; }

 private:
  Model model_;
  Vector theta_;
  std::vector<double> emission_lse_;
};

/// Gradient sink for chain windows. Boltzmann-chain emission expectations are
/// collected per state and expanded once in finalize().
class ChainAccumulator {
 public:
  ChainAccumulator(const ChainPotentials& pot, Vector& grad);
  void add_emission_mass(int s, double w) { emission_mass_[s] += w; }
  Vector& grad() { return grad_; }
  void finalize();

 private:
  const ChainPotentials& pot_;
  Vector& grad_;
  std::vector<double> emission_mass_;
};

/// log p(window | rest) for the label window [begin, end) of a chain sample
/// (with the window's tokens for a Boltzmann chain), computed by
/// forward-backward over the window. begin = 0, end = T is the full
/// (conditional) likelihood.
double chain_window(const ChainPotentials& pot, const Sample& x, int begin, int end, double weight,
                    ChainAccumulator* acc);

/// Variables covered by a chain window, as an m-pair over the sample's graph.
MPair chain_window_pair(const Model& model, const Sample& x, int begin, int end);

}  // namespace scl
