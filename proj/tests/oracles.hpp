#pragma once

// Brute-force reference computations used as test oracles. They share no code
// with the library beyond the model's parameter layout accessors.

#include "scl/model.hpp"

#include <cmath>
#include <vector>

namespace oracle {

using scl::Vector;

// Unnormalized log weight of a binary Boltzmann machine state, pairs in
// lexicographic order.
inline double bm_score(int m, const Vector& theta, const std::vector<int>& x) {
  double s = 0.0;
  int p = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j, ++p) s += theta[p] * x[i] * x[j];
  return s;
}

inline std::vector<int> bits(int m, unsigned code) {
  std::vector<int> x(m);
  for (int i = 0; i < m; ++i) x[i] = (code >> i) & 1;
  return x;
}

// Probability table indexed by the bit code (variable i is bit i).
inline std::vector<double> bm_table(int m, const Vector& theta) {
  const unsigned N = 1u << m;
  std::vector<double> w(N);
  double z = 0.0;
  for (unsigned c = 0; c < N; ++c) z += (w[c] = std::exp(bm_score(m, theta, bits(m, c))));
  for (double& v : w) v /= z;
  return w;
}

inline unsigned code_of(const std::vector<int>& x) {
  unsigned c = 0;
  for (std::size_t i = 0; i < x.size(); ++i) c |= static_cast<unsigned>(x[i]) << i;
  return c;
}

// p(x_A | x_B) by Bayes' rule on the joint table.
inline double bm_conditional(int m, const Vector& theta, const std::vector<int>& A, const std::vector<int>& B,
                             const std::vector<int>& x) {
  const auto p = bm_table(m, theta);
  double num = 0.0, den = 0.0;
  for (unsigned c = 0; c < p.size(); ++c) {
    const auto y = bits(m, c);
    bool matches_b = true;
    for (int b : B) matches_b &= y[b] == x[b];
    if (!matches_b) continue;
    den += p[c];
    bool matches_a = true;
    for (int a : A) matches_a &= y[a] == x[a];
    if (matches_a) num += p[c];
  }
  return num / den;
}

// Fisher information Var(f(X)) from the joint table.
inline scl::Matrix bm_fisher(int m, const Vector& theta) {
  const auto p = bm_table(m, theta);
  const int r = m * (m - 1) / 2;
  Vector mean = Vector::Zero(r);
  scl::Matrix second = scl::Matrix::Zero(r, r);
  for (unsigned c = 0; c < p.size(); ++c) {
    const auto x = bits(m, c);
    Vector f(r);
    int k = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) f[k++] = x[i] * x[j];
    mean += p[c] * f;
    second += p[c] * f * f.transpose();
  }
  return second - mean * mean.transpose();
}

// Unnormalized log weight of a chain labeling; `token` is the emitted symbol
// for a Boltzmann chain, and `features[t]` the active feature ids for a CRF.
inline double chain_score(const scl::Model& model, const Vector& theta, const std::vector<int>& y,
                          const std::vector<int>& tokens, const std::vector<std::vector<int>>& features) {
  double s = theta[model.start_param(y[0])];
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (t > 0) s += theta[model.transition_param(y[t - 1], y[t])];
    if (model.kind() == scl::ModelKind::boltzmann_chain) {
      s += theta[model.emission_param(y[t], tokens[t])];
    } else {
      for (int k : features[t]) {
        const int p = model.emission_param(y[t], k);
        if (p >= 0) s += theta[p];
      }
    }
  }
  return s;
}

// Odometer over a mixed-radix vector; returns false after the last one.
inline bool next_config(std::vector<int>& v, int radix) {
  for (int& d : v) {
    if (++d < radix) return true;
    d = 0;
  }
  return false;
}

}  // namespace oracle
