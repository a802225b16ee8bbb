#include "scl/inference.hpp"

#include <cmath>

namespace scl {

ChainPotentials::ChainPotentials(const Model& model, const Vector& theta) : model_(model), theta_(theta) {
  if (!model.is_chain()) throw ContractError("chain potentials need a chain model");
  model.validate_theta(theta);
  if (model.kind() == ModelKind::boltzmann_chain) {
    const int S = model.states();
    const int V = model.symbols();
    emission_lse_.resize(S);
    const double* em = theta_.data() + model.emission_param(0, 0);
    for (int s = 0; s < S; ++s) emission_lse_[s] = log_sum_exp(em + static_cast<std::size_t>(s) * V, V);
  }
}

ChainAccumulator::ChainAccumulator(const ChainPotentials& pot, Vector& grad)
    : pot_(pot), grad_(grad), emission_mass_(pot.model().states(), 0.0) {}

void ChainAccumulator::finalize() {
  const Model& model = pot_.model();
  if (model.kind() != ModelKind::boltzmann_chain) return;
  const int V = model.symbols();
  for (int s = 0; s < model.states(); ++s) {
    const double mass = emission_mass_[s];
    if (mass == 0.0) continue;
    const int base = model.emission_param(s, 0);
    const double lse = pot_.emission_log_norm(s);
    for (int v = 0; v < V; ++v) grad_[base + v] -= mass * std::exp(pot_.theta()[base + v] - lse);
    emission_mass_[s] = 0.0;
  }
}

namespace {

// Node potential of label s at position t with the token summed out
// (Boltzmann chain) or conditioned on (CRF).
double node_potential(const ChainPotentials& pot, const Sample& x, int t, int s) {
  const Model& model = pot.model();
  const Vector& theta = pot.theta();
  double phi = t == 0 ? theta[model.start_param(s)] : 0.0;
  if (model.kind() == ModelKind::boltzmann_chain) {
    phi += pot.emission_log_norm(s);
  } else {
    for (int k : x.observed[t]) {
      int p = model.emission_param(s, k);
      if (p >= 0) phi += theta[p];
    }
  }
  return phi;
}

double observed_emission(const ChainPotentials& pot, const Sample& x, int t, int T) {
  const Model& model = pot.model();
  const Vector& theta = pot.theta();
  const int y = x.values[t];
  if (model.kind() == ModelKind::boltzmann_chain) return theta[model.emission_param(y, x.values[T + t])];
  double e = 0.0;
  for (int k : x.observed[t]) {
    int p = model.emission_param(y, k);
    if (p >= 0) e += theta[p];
  }
  return e;
}

}  // namespace

double chain_window(const ChainPotentials& pot, const Sample& x, int begin, int end, double weight,
                    ChainAccumulator* acc) {
  const Model& model = pot.model();
  const Vector& theta = pot.theta();
  const int T = model.sequence_length(x);
  if (begin < 0 || end > T || begin >= end) throw ContractError("chain window out of range");
  const int S = model.states();
  const int L = end - begin;
  const bool left = begin > 0;
  const bool right = end < T;
  const auto& y = x.values;

  // Node potentials with boundary transitions folded in.
  std::vector<double> phi(static_cast<std::size_t>(L) * S);
  for (int i = 0; i < L; ++i)
    for (int s = 0; s < S; ++s) {
      double v = node_potential(pot, x, begin + i, s);
      if (i == 0 && left) v += pot.transition(y[begin - 1], s);
      if (i == L - 1 && right) v += pot.transition(s, y[end]);
      phi[i * S + s] = v;
    }

  std::vector<double> alpha(static_cast<std::size_t>(L) * S);
  std::vector<double> tmp(S);
  for (int s = 0; s < S; ++s) alpha[s] = phi[s];
  for (int i = 1; i < L; ++i)
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < S; ++a) tmp[a] = alpha[(i - 1) * S + a] + pot.transition(a, s);
      alpha[i * S + s] = phi[i * S + s] + log_sum_exp(tmp);
    }
  const double log_z = log_sum_exp(&alpha[(L - 1) * S], S);

  double observed = 0.0;
  for (int i = 0; i < L; ++i) {
    const int t = begin + i;
    if (t == 0) observed += theta[model.start_param(y[0])];
    observed += observed_emission(pot, x, t, T);
    if (i > 0) observed += pot.transition(y[t - 1], y[t]);
  }
  if (left) observed += pot.transition(y[begin - 1], y[begin]);
  if (right) observed += pot.transition(y[end - 1], y[end]);
  const double value = observed - log_z;

  if (!acc) return value;

  Vector& grad = acc->grad();
  // Observed features.
  for (int i = 0; i < L; ++i) {
    const int t = begin + i;
    if (t == 0) grad[model.start_param(y[0])] += weight;
    if (model.kind() == ModelKind::boltzmann_chain) {
      grad[model.emission_param(y[t], y[T + t])] += weight;
    } else {
      for (int k : x.observed[t]) {
        int p = model.emission_param(y[t], k);
        if (p >= 0) grad[p] += weight;
      }
    }
    if (i > 0) grad[model.transition_param(y[t - 1], y[t])] += weight;
  }
  if (left) grad[model.transition_param(y[begin - 1], y[begin])] += weight;
  if (right) grad[model.transition_param(y[end - 1], y[end])] += weight;

  // Expected features by forward-backward.
  std::vector<double> beta(static_cast<std::size_t>(L) * S, 0.0);
  for (int i = L - 2; i >= 0; --i)
    for (int s = 0; s < S; ++s) {
      for (int b = 0; b < S; ++b) tmp[b] = pot.transition(s, b) + phi[(i + 1) * S + b] + beta[(i + 1) * S + b];
      beta[i * S + s] = log_sum_exp(tmp);
    }
  for (int i = 0; i < L; ++i) {
    const int t = begin + i;
    for (int s = 0; s < S; ++s) {
      const double mu = std::exp(alpha[i * S + s] + beta[i * S + s] - log_z);
      const double w = weight * mu;
      if (w == 0.0) continue;
      if (t == 0) grad[model.start_param(s)] -= w;
      if (i == 0 && left) grad[model.transition_param(y[begin - 1], s)] -= w;
      if (i == L - 1 && right) grad[model.transition_param(s, y[end])] -= w;
      if (model.kind() == ModelKind::boltzmann_chain) {
        acc->add_emission_mass(s, w);
      } else {
        for (int k : x.observed[t]) {
          int p = model.emission_param(s, k);
          if (p >= 0) grad[p] -= w;
        }
      }
    }
    if (i > 0)
      for (int a = 0; a < S; ++a)
        for (int b = 0; b < S; ++b) {
          const double xi = std::exp(alpha[(i - 1) * S + a] + pot.transition(a, b) + phi[i * S + b] +
                                     beta[i * S + b] - log_z);
          grad[model.transition_param(a, b)] -= weight * xi;
        }
  }
  return value;
}

MPair chain_window_pair(const Model& model, const Sample& x, int begin, int end) {
  const int T = model.sequence_length(x);
  const int n = model.kind() == ModelKind::boltzmann_chain ? 2 * T : T;
  MPair pair;
  std::vector<char> in_a(n, 0);
  for (int t = begin; t < end; ++t) {
    pair.A.push_back(t);
    in_a[t] = 1;
    if (model.kind() == ModelKind::boltzmann_chain) {
      pair.A.push_back(T + t);
      in_a[T + t] = 1;
    }
  }
  for (int v = 0; v < n; ++v)
    if (!in_a[v]) pair.B.push_back(v);
  return pair;
}

}  // namespace scl
