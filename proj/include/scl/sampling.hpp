#pragma once

#include "scl/model.hpp"
#include "scl/rng.hpp"

namespace scl {

/// Inverse-CDF sampler over the enumerated joint space of a fixed-size model.
class ExactSampler {
 public:
  ExactSampler(const Model& model, const Vector& theta);
  Sample draw(Rng& rng) const;
  /// Probability of each configuration, first variable fastest.
  const std::vector<double>& probabilities() const { return prob_; }
  Sample configuration(std::size_t index) const;

 private:
  std::vector<int> cards_;
  std::vector<double> prob_;
  std::vector<double> cdf_;
};

/// n iid draws from p_theta. Fixed-size models only.
Dataset sample_exact(const Model& model, const Vector& theta, std::size_t n, std::uint64_t seed);

/// n iid Boltzmann-chain sequences (y, x) of the given length, by
/// forward filtering and backward sampling.
Dataset sample_chain(const Model& model, const Vector& theta, std::size_t n, int length, std::uint64_t seed);

/// Labels y ~ p_theta(y | x) for each observation sequence of a CRF.
Dataset sample_crf_labels(const Model& model, const Vector& theta,
                          const std::vector<std::vector<std::vector<int>>>& observations, std::uint64_t seed);

}  // namespace scl
