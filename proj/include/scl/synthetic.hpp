#pragma once

#include "scl/model.hpp"

#include <cstdint>

namespace scl {

struct SyntheticData {
  Dataset data;
  Vector theta0;
  std::uint64_t seed = 0;
  int length = 0;  // chain kinds
};

struct SyntheticOptions {
  int length = 0;  // sequence length, chain kinds only
  /// CRF: probability of each observation feature being the active one at a
  /// position (uniform when empty).
  std::vector<double> observation_prob;
};

/// theta with the first half of the coordinates -1 and the rest +1.
Vector alternating_theta(int r);

/// Draws n samples from p_theta0 and records theta0 and the seed. For a CRF
/// each position activates one observation feature drawn from
/// observation_prob, then y ~ p_theta0(y | x).
SyntheticData make_synthetic(const Model& model, const Vector& theta0, std::size_t n, std::uint64_t seed,
                             const SyntheticOptions& options = {});

}  // namespace scl
