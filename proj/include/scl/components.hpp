#pragma once

#include "scl/model.hpp"
#include "scl/policy.hpp"

#include <string>
#include <vector>

namespace scl {

/// One likelihood object. Fixed-size models use explicit m-pairs. Chain
/// models use templates: window length `order` slides over each sequence and
/// the object is the sum of log p(window | rest); order 0 is the full
/// (conditional) likelihood of the sequence.
struct Component {
  enum class Kind { pair, chain_template };
  Kind kind = Kind::pair;
  MPair pair;
  int order = 0;
  std::string name;
};

class ComponentSet {
 public:
  ComponentSet() = default;
  ComponentSet(std::vector<Component> components, Vector beta);

  /// FL: A = all variables, B = {} (chain: the full-sequence template).
  static ComponentSet full_likelihood(const Model& model);
  /// PL of order l: every l-subset A with B = A^c (chain: the width-l window template).
  static ComponentSet pseudo_likelihood(const Model& model, int order);
  static ComponentSet custom(const Model& model, std::vector<MPair> pairs);
  /// Components of `a` followed by those of `b`.
  static ComponentSet concat(const ComponentSet& a, const ComponentSet& b);

  int size() const { return static_cast<int>(components_.size()); }
  const Component& operator[](int j) const { return components_[j]; }
  const std::vector<Component>& components() const { return components_; }
  const Vector& beta() const { return beta_; }
  ComponentSet with_beta(Vector beta) const;
  /// Throws unless every component fits `model`.
  void validate(const Model& model) const;

 private:
  std::vector<Component> components_;
  Vector beta_;
};

/// A component set and its selection policy, with zero-lambda components
/// removed.
struct PolicySpec {
  ComponentSet components;
  SelectionPolicy policy;
  /// For each retained component, the index of its family term in the
  /// policy expression ("0.7PL1+0.3PL2" has terms 0 and 1).
  std::vector<int> term;
};

/// Parses policy expressions such as "FL", "PL1", "0.7PL1+0.3PL2" or
/// "0.5FL+PL1". Each term weights every component of that order by an
/// independent selection probability (default 1).
PolicySpec parse_policy(const Model& model, const std::string& expr);

/// Drops components with lambda_j = 0 from a component set and policy.
PolicySpec drop_unselected(const ComponentSet& comps, const SelectionPolicy& policy);

}  // namespace scl
