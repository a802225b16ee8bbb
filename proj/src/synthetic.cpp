#include "scl/synthetic.hpp"

#include "scl/rng.hpp"
#include "scl/sampling.hpp"

namespace scl {

Vector alternating_theta(int r) {
  Vector t(r);
  for (int i = 0; i < r; ++i) t[i] = i < r / 2 ? -1.0 : 1.0;
  return t;
}

SyntheticData make_synthetic(const Model& model, const Vector& theta0, std::size_t n, std::uint64_t seed,
                             const SyntheticOptions& options) {
  model.validate_theta(theta0);
  SyntheticData out;
  out.theta0 = theta0;
  out.seed = seed;
  out.length = options.length;
  switch (model.kind()) {
    case ModelKind::generic:
    case ModelKind::boltzmann_machine: out.data = sample_exact(model, theta0, n, seed); break;
    case ModelKind::boltzmann_chain:
      if (options.length < 1) throw ContractError("chain data needs a sequence length");
      out.data = sample_chain(model, theta0, n, options.length, seed);
      break;
    case ModelKind::linear_chain_crf: {
      if (options.length < 1) throw ContractError("chain data needs a sequence length");
      const int K = model.num_obs_features();
      std::vector<double> cdf(K);
      double acc = 0.0;
      for (int k = 0; k < K; ++k) {
        const double p = options.observation_prob.empty() ? 1.0 : options.observation_prob.at(k);
        if (p < 0.0) throw ContractError("observation probabilities must be non-negative");
        acc += p;
        cdf[k] = acc;
      }
      if (!(acc > 0.0)) throw ContractError("observation probabilities sum to zero");
      Rng rng(derive_seed(seed, 0));
      std::vector<std::vector<std::vector<int>>> obs(n);
      for (auto& seq : obs)
        for (int t = 0; t < options.length; ++t) {
          const double u = rng.uniform() * acc;
          int k = 0;
          while (k + 1 < K && cdf[k] <= u) ++k;
          seq.push_back({k});
        }
      out.data = sample_crf_labels(model, theta0, obs, derive_seed(seed, 1));
      break;
    }
  }
  return out;
}

}  // namespace scl
