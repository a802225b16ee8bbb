#include "scl/sampling.hpp"

#include "scl/inference.hpp"

#include <algorithm>
#include <cmath>

namespace scl {

ExactSampler::ExactSampler(const Model& model, const Vector& theta) {
  if (model.is_chain()) throw ContractError("exact sampler needs a fixed-size model");
  model.validate_theta(theta);
  auto g = model.graph();
  const std::uint64_t total = g->state_space_size();
  if (total > enumeration_cap())
    throw InfeasibleError("state space of " + std::to_string(total) + " configurations exceeds the cap");
  cards_ = g->cardinalities();
  const double logz = log_partition_enumerate(*g, theta);
  prob_.resize(total);
  cdf_.resize(total);
  std::vector<int> values(cards_.size(), 0);
  double acc = 0.0;
  for (std::uint64_t c = 0; c < total; ++c) {
    prob_[c] = std::exp(g->score(theta, values) - logz);
    acc += prob_[c];
    cdf_[c] = acc;
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (++values[v] < cards_[v]) break;
      values[v] = 0;
    }
  }
  for (double& c : cdf_) c /= acc;
}

Sample ExactSampler::configuration(std::size_t index) const {
  Sample s;
  s.values.resize(cards_.size());
  for (std::size_t v = 0; v < cards_.size(); ++v) {
    s.values[v] = static_cast<int>(index % cards_[v]);
    index /= cards_[v];
  }
  return s;
}

Sample ExactSampler::draw(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t idx = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
  return configuration(idx);
}

Dataset sample_exact(const Model& model, const Vector& theta, std::size_t n, std::uint64_t seed) {
  ExactSampler sampler(model, theta);
  Rng rng(seed);
  Dataset d;
  d.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) d.samples.push_back(sampler.draw(rng));
  return d;
}

namespace {

int draw_categorical(const std::vector<double>& logw, Rng& rng) {
  const double lse = log_sum_exp(logw);
  double u = rng.uniform();
  for (std::size_t i = 0; i < logw.size(); ++i) {
    u -= std::exp(logw[i] - lse);
    if (u < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(logw.size()) - 1;
}

// Forward filtering, backward sampling of the labels given node potentials phi[t*S+s].
std::vector<int> ffbs(const ChainPotentials& pot, const std::vector<double>& phi, int T, Rng& rng) {
  const int S = pot.model().states();
  std::vector<double> alpha(phi.size());
  std::vector<double> tmp(S);
  for (int s = 0; s < S; ++s) alpha[s] = phi[s];
  for (int t = 1; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < S; ++a) tmp[a] = alpha[(t - 1) * S + a] + pot.transition(a, s);
      alpha[t * S + s] = phi[t * S + s] + log_sum_exp(tmp);
    }
  std::vector<int> y(T);
  tmp.assign(alpha.begin() + static_cast<std::ptrdiff_t>(T - 1) * S, alpha.begin() + static_cast<std::ptrdiff_t>(T) * S);
  y[T - 1] = draw_categorical(tmp, rng);
  for (int t = T - 2; t >= 0; --t) {
    for (int a = 0; a < S; ++a) tmp[a] = alpha[t * S + a] + pot.transition(a, y[t + 1]);
    y[t] = draw_categorical(tmp, rng);
  }
  return y;
}

}  // namespace

Dataset sample_chain(const Model& model, const Vector& theta, std::size_t n, int length, std::uint64_t seed) {
  if (model.kind() != ModelKind::boltzmann_chain) throw ContractError("sample_chain needs a Boltzmann chain");
  if (length < 1) throw ContractError("sequence length must be >= 1");
  ChainPotentials pot(model, theta);
  const int S = model.states();
  const int V = model.symbols();
  const int T = length;
  std::vector<double> phi(static_cast<std::size_t>(T) * S);
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s)
      phi[t * S + s] = pot.emission_log_norm(s) + (t == 0 ? theta[model.start_param(s)] : 0.0);
  Rng rng(seed);
  Dataset d;
  std::vector<double> em(V);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> y = ffbs(pot, phi, T, rng);
    Sample s;
    s.values = y;
    s.values.resize(2 * T);
    for (int t = 0; t < T; ++t) {
      for (int v = 0; v < V; ++v) em[v] = theta[model.emission_param(y[t], v)];
      s.values[T + t] = draw_categorical(em, rng);
    }
    d.samples.push_back(std::move(s));
  }
  return d;
}

Dataset sample_crf_labels(const Model& model, const Vector& theta,
                          const std::vector<std::vector<std::vector<int>>>& observations, std::uint64_t seed) {
  if (model.kind() != ModelKind::linear_chain_crf) throw ContractError("sample_crf_labels needs a CRF");
  ChainPotentials pot(model, theta);
  const int S = model.states();
  Rng rng(seed);
  Dataset d;
  for (const auto& obs : observations) {
    const int T = static_cast<int>(obs.size());
    if (T == 0) throw DimensionError("empty observation sequence");
    std::vector<double> phi(static_cast<std::size_t>(T) * S, 0.0);
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < S; ++s) {
        double v = t == 0 ? theta[model.start_param(s)] : 0.0;
        for (int k : obs[t]) {
          if (k < 0 || k >= model.num_obs_features()) throw DimensionError("observation feature out of range");
          int p = model.emission_param(s, k);
          if (p >= 0) v += theta[p];
        }
        phi[t * S + s] = v;
      }
    Sample s;
    s.values = ffbs(pot, phi, T, rng);
    s.observed = obs;
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace scl
