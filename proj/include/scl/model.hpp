#pragma once

#include "scl/common.hpp"

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scl {

enum class ModelKind { generic, boltzmann_machine, boltzmann_chain, linear_chain_crf };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// How a generic clique maps its configuration to features.
///   product:   one parameter, f_C(x_C) = prod_{i in C} x_i
///   indicator: one parameter per configuration except the all-zero one
enum class CliqueFeature { product, indicator };

/// One observation. For fixed-size models `values` holds one state per
/// variable. Boltzmann chains store (y_0..y_{T-1}, x_0..x_{T-1}); linear-chain
/// CRFs store the labels y in `values` and the active observation-feature ids
/// of each position in `observed`.
struct Sample {
  std::vector<int> values;
  std::vector<std::vector<int>> observed;

  friend bool operator==(const Sample&, const Sample&) = default;
  friend auto operator<=>(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Sparse feature rows indexed by a factor's configuration (row-major over the
/// scope, first scope variable most significant).
class FeatureTable {
 public:
  explicit FeatureTable(std::vector<int> cards);

  void add(std::size_t config, int param, double value);
  void finalize();

  const std::vector<int>& cards() const { return cards_; }
  std::size_t num_configs() const { return num_configs_; }

  double log_potential(std::size_t config, const Vector& theta) const {
    double s = 0.0;
    for (std::uint32_t e = begin_[config]; e < begin_[config + 1]; ++e) s += theta[params_[e]] * values_[e];
    return s;
  }
  void add_features(std::size_t config, double weight, Vector& out) const {
    for (std::uint32_t e = begin_[config]; e < begin_[config + 1]; ++e) out[params_[e]] += weight * values_[e];
  }
  std::span<const int> params(std::size_t config) const {
    return {params_.data() + begin_[config], begin_[config + 1] - begin_[config]};
  }
  std::span<const double> values(std::size_t config) const {
    return {values_.data() + begin_[config], begin_[config + 1] - begin_[config]};
  }

 private:
  std::vector<int> cards_;
  std::size_t num_configs_;
  std::vector<std::vector<std::pair<int, double>>> staging_;
  std::vector<std::uint32_t> begin_;
  std::vector<int> params_;
  std::vector<double> values_;
};

struct Factor {
  std::vector<int> scope;
  std::shared_ptr<const FeatureTable> table;
};

/// A concrete factor graph over the variables of one sample shape.
class FactorGraph {
 public:
  FactorGraph(std::vector<int> cards, std::vector<Factor> factors, int num_params);

  int num_vars() const { return static_cast<int>(cards_.size()); }
  int num_params() const { return num_params_; }
  const std::vector<int>& cardinalities() const { return cards_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<int>& factors_of(int var) const { return var_factors_[var]; }

  std::size_t config_of(const Factor& f, std::span<const int> values) const;
  double score(const Vector& theta, std::span<const int> values) const;
  void add_stats(std::span<const int> values, double weight, Vector& out) const;

  /// Number of joint configurations, saturating at UINT64_MAX.
  std::uint64_t state_space_size() const;

 private:
  std::vector<int> cards_;
  std::vector<Factor> factors_;
  int num_params_;
  std::vector<std::vector<int>> var_factors_;
};

/// A discrete exponential-family MRF. Immutable and cheap to copy.
class Model {
 public:
  static Model boltzmann_machine(int m);
  static Model generic(std::vector<int> cards, std::vector<std::vector<int>> cliques,
                       CliqueFeature feature = CliqueFeature::product);
  /// Generative chain over labels y (states) and tokens x (symbols) with tied
  /// start, transition and emission parameters.
  static Model boltzmann_chain(int states, int symbols);
  /// Conditional chain p(y|x). Emission parameters exist only for the listed
  /// (state, observation feature) pairs.
  static Model linear_chain_crf(int states, int num_obs_features,
                                std::vector<std::pair<int, int>> supported_pairs);

  ModelKind kind() const;
  int num_params() const;
  bool is_chain() const;
  bool is_conditional() const { return kind() == ModelKind::linear_chain_crf; }

  // Fixed-size kinds (generic, boltzmann_machine).
  int num_vars() const;
  const std::vector<int>& cardinalities() const;
  const std::vector<std::vector<int>>& cliques() const;
  CliqueFeature clique_feature() const;
  std::shared_ptr<const FactorGraph> graph() const;

  /// Factor graph for the shape of `sample` (any kind).
  std::shared_ptr<const FactorGraph> graph(const Sample& sample) const;

  // Chain kinds.
  int states() const;
  int symbols() const;
  int num_obs_features() const;
  int start_param(int s) const;
  int transition_param(int a, int b) const;
  /// Boltzmann chain: (state, symbol). CRF: (state, observation feature), -1 if unsupported.
  int emission_param(int s, int v) const;
  /// CRF: for an observation feature, the (state, param) pairs it supports.
  const std::vector<std::pair<int, int>>& emission_by_feature(int feature) const;
  const std::vector<std::pair<int, int>>& supported_pairs() const;
  int sequence_length(const Sample& sample) const;

  /// Throws DimensionError if `sample` does not fit the model.
  void validate(const Sample& sample) const;
  void validate_theta(const Vector& theta) const;

  std::string param_name(int p) const;

 private:
  struct Impl;
  explicit Model(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// An m-pair (A, B): disjoint variable index sets with A non-empty.
struct MPair {
  std::vector<int> A;
  std::vector<int> B;

  friend bool operator==(const MPair&, const MPair&) = default;
};

/// Throws ContractError unless A != {} and A, B are disjoint and in [0, num_vars).
void validate_pair(const MPair& pair, int num_vars);

}  // namespace scl
