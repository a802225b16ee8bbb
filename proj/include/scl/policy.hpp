#pragma once

#include "scl/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scl {

enum class PolicyFamily { independence, multinomial, product_of_multinomials };

std::string to_string(PolicyFamily family);
PolicyFamily policy_family_from_string(const std::string& name);

/// Distribution P(Z) over the k component indicators.
struct SelectionPolicy {
  PolicyFamily family = PolicyFamily::independence;
  Vector lambda;                         // E[Z_j]
  std::vector<std::vector<int>> blocks;  // product_of_multinomials only

  static SelectionPolicy independence(Vector lambda);
  static SelectionPolicy multinomial(Vector lambda);
  static SelectionPolicy product_of_multinomials(Vector lambda, std::vector<std::vector<int>> blocks);
  /// Independence with lambda = 1: every component always selected.
  static SelectionPolicy always(int k);

  int size() const { return static_cast<int>(lambda.size()); }
  /// Throws ContractError unless lambda satisfies the family's constraints.
  void validate() const;
  /// E[Z Z^T].
  Matrix second_moment() const;
};

/// n x k binary matrix of per-sample selection indicators.
class IndicatorMatrix {
 public:
  IndicatorMatrix() = default;
  IndicatorMatrix(std::size_t n, int k, std::uint8_t fill = 0) : n_(n), k_(k), z_(n * k, fill) {}
  static IndicatorMatrix ones(std::size_t n, int k) { return {n, k, 1}; }

  std::size_t rows() const { return n_; }
  int cols() const { return k_; }
  std::uint8_t operator()(std::size_t i, int j) const { return z_[i * k_ + j]; }
  std::uint8_t& operator()(std::size_t i, int j) { return z_[i * k_ + j]; }
  std::vector<std::uint8_t> row(std::size_t i) const {
    return {z_.begin() + static_cast<std::ptrdiff_t>(i * k_), z_.begin() + static_cast<std::ptrdiff_t>((i + 1) * k_)};
  }
  Vector column_means() const;

 private:
  std::size_t n_ = 0;
  int k_ = 0;
  std::vector<std::uint8_t> z_;
};

/// n iid rows from P(Z); deterministic given seed.
IndicatorMatrix draw_indicators(const SelectionPolicy& policy, std::size_t n, std::uint64_t seed);

}  // namespace scl
