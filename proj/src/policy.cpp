#include "scl/policy.hpp"

#include "scl/rng.hpp"

#include <cmath>

namespace scl {

std::string to_string(PolicyFamily family) {
  switch (family) {
    case PolicyFamily::independence: return "independence";
    case PolicyFamily::multinomial: return "multinomial";
    case PolicyFamily::product_of_multinomials: return "product_of_multinomials";
  }
  return "unknown";
}

PolicyFamily policy_family_from_string(const std::string& name) {
  if (name == "independence") return PolicyFamily::independence;
  if (name == "multinomial") return PolicyFamily::multinomial;
  if (name == "product_of_multinomials" || name == "product") return PolicyFamily::product_of_multinomials;
  throw ContractError("unknown policy family '" + name + "'");
}

SelectionPolicy SelectionPolicy::independence(Vector lambda) {
  SelectionPolicy p{PolicyFamily::independence, std::move(lambda), {}};
  p.validate();
  return p;
}

SelectionPolicy SelectionPolicy::multinomial(Vector lambda) {
  SelectionPolicy p{PolicyFamily::multinomial, std::move(lambda), {}};
  p.validate();
  return p;
}

SelectionPolicy SelectionPolicy::product_of_multinomials(Vector lambda, std::vector<std::vector<int>> blocks) {
  SelectionPolicy p{PolicyFamily::product_of_multinomials, std::move(lambda), std::move(blocks)};
  p.validate();
  return p;
}

SelectionPolicy SelectionPolicy::always(int k) { return independence(Vector::Ones(k)); }

void SelectionPolicy::validate() const {
  const int k = size();
  if (k < 1) throw ContractError("policy needs at least one component");
  for (int j = 0; j < k; ++j)
    if (!(lambda[j] > 0.0) || lambda[j] > 1.0 + 1e-12)
      throw ContractError("lambda[" + std::to_string(j) + "] = " + std::to_string(lambda[j]) +
                          " is outside (0, 1]");
  constexpr double tol = 1e-9;
  switch (family) {
    case PolicyFamily::independence: return;
    case PolicyFamily::multinomial:
      if (std::abs(lambda.sum() - 1.0) > tol) throw ContractError("multinomial lambda must sum to 1");
      return;
    case PolicyFamily::product_of_multinomials: {
      std::vector<int> seen(k, 0);
      for (const auto& b : blocks) {
        if (b.empty()) throw ContractError("empty policy block");
        double s = 0.0;
        for (int j : b) {
          if (j < 0 || j >= k) throw ContractError("policy block index out of range");
          if (seen[j]++) throw ContractError("component " + std::to_string(j) + " is in two blocks");
          s += lambda[j];
        }
        if (std::abs(s - 1.0) > tol) throw ContractError("lambda must sum to 1 within each block");
      }
      for (int j = 0; j < k; ++j)
        if (!seen[j]) throw ContractError("component " + std::to_string(j) + " is in no block");
      return;
    }
  }
}

Matrix SelectionPolicy::second_moment() const {
  const int k = size();
  Matrix m = lambda * lambda.transpose();
  switch (family) {
    case PolicyFamily::independence:
      for (int j = 0; j < k; ++j) m(j, j) = lambda[j];
      break;
    case PolicyFamily::multinomial:
      m.setZero();
      for (int j = 0; j < k; ++j) m(j, j) = lambda[j];
      break;
    case PolicyFamily::product_of_multinomials:
      for (const auto& b : blocks) {
        for (int i : b)
          for (int j : b) m(i, j) = 0.0;
        for (int j : b) m(j, j) = lambda[j];
      }
      break;
  }
  return m;
}

Vector IndicatorMatrix::column_means() const {
  Vector m = Vector::Zero(k_);
  for (std::size_t i = 0; i < n_; ++i)
    for (int j = 0; j < k_; ++j) m[j] += (*this)(i, j);
  return n_ ? Vector(m / static_cast<double>(n_)) : m;
}

namespace {

int draw_block(const Vector& lambda, const std::vector<int>& block, Rng& rng) {
  double u = rng.uniform();
  for (int j : block) {
    u -= lambda[j];
    if (u < 0.0) return j;
  }
  return block.back();
}

}  // namespace

IndicatorMatrix draw_indicators(const SelectionPolicy& policy, std::size_t n, std::uint64_t seed) {
  policy.validate();
  const int k = policy.size();
  IndicatorMatrix z(n, k);
  Rng rng(seed);
  std::vector<int> all(k);
  for (int j = 0; j < k; ++j) all[j] = j;
  for (std::size_t i = 0; i < n; ++i) {
    switch (policy.family) {
      case PolicyFamily::independence:
        for (int j = 0; j < k; ++j) z(i, j) = policy.lambda[j] >= 1.0 || rng.uniform() < policy.lambda[j];
        break;
      case PolicyFamily::multinomial: z(i, draw_block(policy.lambda, all, rng)) = 1; break;
      case PolicyFamily::product_of_multinomials:
        for (const auto& b : policy.blocks) z(i, draw_block(policy.lambda, b, rng)) = 1;
        break;
    }
  }
  return z;
}

}  // namespace scl
