#include "doctest.h"
#include "oracles.hpp"

#include "scl/inference.hpp"
#include "scl/rng.hpp"
#include "scl/sampling.hpp"

#include <cmath>
#include <map>

using namespace scl;

namespace {

Vector alternating_theta() { return (Vector(10) << -1, -1, -1, -1, -1, 1, 1, 1, 1, 1).finished(); }

Vector random_theta(int r, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Vector t(r);
  for (int i = 0; i < r; ++i) t[i] = scale * (2.0 * rng.uniform() - 1.0);
  return t;
}

Sample bm_sample(const std::vector<int>& x) { return Sample{x, {}}; }

}  // namespace

TEST_CASE("log partition of trivial machines") {
  CHECK(log_partition(Model::boltzmann_machine(2), Vector::Zero(1)) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(log_partition(Model::boltzmann_machine(5), Vector::Zero(10)) ==
        doctest::Approx(5 * std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("log_prob at theta = 0 is uniform") {
  Model m = Model::boltzmann_machine(5);
  CHECK(log_prob(m, Vector::Zero(10), bm_sample({1, 0, 1, 1, 0})) == doctest::Approx(-5 * std::log(2.0)));
}

TEST_CASE("log_prob normalizes and matches the direct table") {
  Model m = Model::boltzmann_machine(5);
  const Vector th = alternating_theta();
  const auto table = oracle::bm_table(5, th);
  double total = 0.0;
  for (unsigned c = 0; c < 32; ++c) {
    const double p = std::exp(log_prob(m, th, bm_sample(oracle::bits(5, c))));
    CHECK(p == doctest::Approx(table[c]).epsilon(1e-12));
    total += p;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);

  Model m3 = Model::boltzmann_machine(3);
  const Vector t3 = (Vector(3) << 1, -1, 0.5).finished();
  const auto t3_table = oracle::bm_table(3, t3);
  for (unsigned c = 0; c < 8; ++c)
    CHECK(std::exp(log_prob(m3, t3, bm_sample(oracle::bits(3, c)))) == doctest::Approx(t3_table[c]).epsilon(1e-13));
}

TEST_CASE("invalid assignments are rejected") {
  Model m = Model::boltzmann_machine(3);
  CHECK_THROWS_AS(log_prob(m, Vector::Zero(3), bm_sample({0, 1})), DimensionError);
  CHECK_THROWS_AS(log_prob(m, Vector::Zero(3), bm_sample({0, 2, 1})), DimensionError);
  CHECK_THROWS_AS(log_prob(m, Vector::Zero(2), bm_sample({0, 1, 1})), DimensionError);
}

TEST_CASE("sufficient statistics") {
  Model m3 = Model::boltzmann_machine(3);
  CHECK(sufficient_stats(m3, bm_sample({0, 0, 0})).isZero());
  CHECK(sufficient_stats(m3, bm_sample({1, 1, 1})) == Vector::Ones(3));
  Model m = Model::boltzmann_machine(5);
  const Vector th = random_theta(10, 3);
  const double logz = log_partition(m, th);
  for (unsigned c = 0; c < 32; c += 5) {
    const Sample x = bm_sample(oracle::bits(5, c));
    CHECK(std::abs(th.dot(sufficient_stats(m, x)) - logz - log_prob(m, th, x)) < 1e-12);
  }
}

TEST_CASE("gradient of log Z equals expected statistics") {
  Model m = Model::boltzmann_machine(4);
  const Vector th = random_theta(6, 11);
  const Vector e = expected_stats(m, th, bm_sample({0, 0, 0, 0}));
  for (int k = 0; k < 6; ++k) {
    Vector tp = th, tm = th;
    tp[k] += 1e-5;
    tm[k] -= 1e-5;
    const double fd = (log_partition(m, tp) - log_partition(m, tm)) / 2e-5;
    CHECK(std::abs(fd - e[k]) / std::max(std::abs(e[k]), 1e-3) < 1e-6);
  }
}

TEST_CASE("conditional probabilities") {
  Model m = Model::boltzmann_machine(5);
  const Vector th = alternating_theta();

  SUBCASE("theta = 0") {
    CHECK(conditional_log_prob(m, Vector::Zero(10), {{0, 1}, {2, 3}}, bm_sample({1, 0, 1, 1, 0})) ==
          doctest::Approx(-2 * std::log(2.0)));
  }
  SUBCASE("A u B covers everything") {
    const Sample x = bm_sample({1, 0, 1, 1, 0});
    const double got = conditional_log_prob(m, th, {{1, 3}, {0, 2, 4}}, x);
    CHECK(std::abs(got - std::log(oracle::bm_conditional(5, th, {1, 3}, {0, 2, 4}, x.values))) < 1e-12);
  }
  SUBCASE("Bayes rule on the joint table, A = {1}") {
    for (unsigned c = 0; c < 32; ++c) {
      const Sample x = bm_sample(oracle::bits(5, c));
      const double got = conditional_log_prob(m, th, {{0}, {1, 2, 3, 4}}, x);
      CHECK(std::abs(got - std::log(oracle::bm_conditional(5, th, {0}, {1, 2, 3, 4}, x.values))) < 1e-12);
    }
  }
  SUBCASE("marginalized complement") {
    const Sample x = bm_sample({0, 1, 1, 0, 1});
    const double got = conditional_log_prob(m, th, {{2}, {0, 4}}, x);
    CHECK(std::abs(got - std::log(oracle::bm_conditional(5, th, {2}, {0, 4}, x.values))) < 1e-12);
  }
  SUBCASE("invalid m-pairs") {
    const Sample x = bm_sample({0, 1, 1, 0, 1});
    CHECK_THROWS_AS(conditional_log_prob(m, th, {{}, {1}}, x), ContractError);
    CHECK_THROWS_AS(conditional_log_prob(m, th, {{1}, {1, 2}}, x), ContractError);
    CHECK_THROWS_AS(conditional_log_prob(m, th, {{7}, {}}, x), ContractError);
  }
}

TEST_CASE("conditional coherence over random m-pairs") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int mv = 3 + static_cast<int>(rng.below(4));
    Model m = Model::boltzmann_machine(mv);
    const Vector th = random_theta(m.num_params(), rng.next(), 2.0);
    std::vector<int> A, B;
    std::vector<int> x(mv);
    for (int v = 0; v < mv; ++v) {
      x[v] = static_cast<int>(rng.below(2));
      const auto role = rng.below(3);
      if (role == 0) A.push_back(v);
      else if (role == 1) B.push_back(v);
    }
    if (A.empty()) A.push_back(B.empty() ? 0 : B.back()), B.erase(std::remove(B.begin(), B.end(), A[0]), B.end());
    double total = 0.0;
    for (unsigned c = 0; c < (1u << A.size()); ++c) {
      auto y = x;
      for (std::size_t a = 0; a < A.size(); ++a) y[A[a]] = (c >> a) & 1;
      total += std::exp(conditional_log_prob(m, th, {A, B}, bm_sample(y)));
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("generic models with indicator features normalize") {
  Model m = Model::generic({2, 3, 2}, {{0, 1}, {1, 2}, {0}}, CliqueFeature::indicator);
  CHECK(m.num_params() == 5 + 5 + 1);
  const Vector th = random_theta(m.num_params(), 5);
  double total = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 2; ++c) total += std::exp(log_prob(m, th, bm_sample({a, b, c})));
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK_THROWS_AS(Model::generic({2, 2}, {{0, 1}, {1, 0}}), ContractError);
  CHECK_THROWS_AS(Model::generic({2, 2}, {{0, 2}}), ContractError);
}

TEST_CASE("parameter coverage") {
  Model m = Model::boltzmann_chain(3, 4);
  std::vector<int> hits(m.num_params(), 0);
  for (int s = 0; s < 3; ++s) {
    ++hits[m.start_param(s)];
    for (int b = 0; b < 3; ++b) ++hits[m.transition_param(s, b)];
    for (int v = 0; v < 4; ++v) ++hits[m.emission_param(s, v)];
  }
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("Boltzmann chain dynamic programming matches enumeration") {
  for (int S = 1; S <= 4; ++S)
    for (int T = 1; T <= 6; ++T) {
      const int V = 2;
      if (std::pow(S * V, T) > 5e5) continue;
      Model m = Model::boltzmann_chain(S, V);
      const Vector th = random_theta(m.num_params(), 7 + S * 10 + T);
      Sample shape{std::vector<int>(2 * T, 0), {}};
      std::vector<double> scores;
      std::vector<int> y(T, 0), x(T, 0);
      do {
        do scores.push_back(oracle::chain_score(m, th, y, x, {}));
        while (oracle::next_config(x, V));
      } while (oracle::next_config(y, S));
      const double brute = log_sum_exp(scores);
      CHECK(std::abs(log_partition(m, th, shape) - brute) < 1e-10);
      CHECK(std::abs(log_partition_enumerate(*m.graph(shape), th) - brute) < 1e-10);
    }
}

TEST_CASE("CRF dynamic programming matches enumeration") {
  Rng rng(99);
  for (int S = 2; S <= 4; ++S)
    for (int T = 1; T <= 6; ++T) {
      std::vector<std::pair<int, int>> pairs;
      for (int s = 0; s < S; ++s)
        for (int f = 0; f < 3; ++f)
          if ((s + f) % 2 == 0 || f == 2) pairs.emplace_back(s, f);
      Model m = Model::linear_chain_crf(S, 3, pairs);
      const Vector th = random_theta(m.num_params(), rng.next());
      Sample x{std::vector<int>(T, 0), std::vector<std::vector<int>>(T)};
      for (int t = 0; t < T; ++t) x.observed[t] = {static_cast<int>(rng.below(3)), 2};
      std::vector<double> scores;
      std::vector<int> y(T, 0);
      do scores.push_back(oracle::chain_score(m, th, y, {}, x.observed));
      while (oracle::next_config(y, S));
      CHECK(std::abs(log_partition(m, th, x) - log_sum_exp(scores)) < 1e-10);
      x.values = y;
      x.values[0] = S - 1;
      CHECK(std::abs(log_prob(m, th, x) - (oracle::chain_score(m, th, x.values, {}, x.observed) -
                                           log_sum_exp(scores))) < 1e-10);
    }
}

TEST_CASE("enumeration cap") {
  Model big = Model::boltzmann_machine(26);
  CHECK_THROWS_AS(log_partition(big, Vector::Zero(big.num_params())), InfeasibleError);
  CHECK_THROWS_AS(ExactSampler(big, Vector::Zero(big.num_params())), InfeasibleError);
}

TEST_CASE("exact sampling") {
  SUBCASE("uniform law") {
    Model m = Model::boltzmann_machine(3);
    Dataset d = sample_exact(m, Vector::Zero(3), 80000, 17);
    std::map<std::vector<int>, int> counts;
    for (const auto& s : d.samples) ++counts[s.values];
    CHECK(counts.size() == 8);
    for (const auto& [k, c] : counts) CHECK(std::abs(c / 80000.0 - 0.125) < 0.005);
  }
  SUBCASE("n = 0") { CHECK(sample_exact(Model::boltzmann_machine(3), Vector::Zero(3), 0, 1).empty()); }
  SUBCASE("frequencies within 4 sigma of the exact table") {
    Model m = Model::boltzmann_machine(5);
    const Vector th = alternating_theta();
    const std::size_t n = 100000;
    Dataset d = sample_exact(m, th, n, 23);
    std::vector<double> counts(32, 0.0);
    for (const auto& s : d.samples) counts[oracle::code_of(s.values)] += 1;
    const auto p = oracle::bm_table(5, th);
    for (unsigned c = 0; c < 32; ++c) {
      const double sd = std::sqrt(p[c] * (1 - p[c]) / n);
      CHECK(std::abs(counts[c] / n - p[c]) <= 4 * sd + 1e-12);
    }
  }
  SUBCASE("deterministic in the seed") {
    Model m = Model::boltzmann_machine(4);
    const Vector th = random_theta(6, 1);
    CHECK(sample_exact(m, th, 50, 5).samples == sample_exact(m, th, 50, 5).samples);
    CHECK(sample_exact(m, th, 50, 5).samples != sample_exact(m, th, 50, 6).samples);
  }
}

TEST_CASE("chain sampler matches the exact sequence law") {
  Model m = Model::boltzmann_chain(2, 2);
  const Vector th = random_theta(m.num_params(), 41);
  const int T = 3;
  const std::size_t n = 60000;
  Dataset d = sample_chain(m, th, n, T, 8);
  std::map<std::vector<int>, double> counts;
  for (const auto& s : d.samples) counts[s.values] += 1;
  const double logz = log_partition(m, th, Sample{std::vector<int>(2 * T, 0), {}});
  std::vector<int> y(T, 0), x(T, 0);
  do {
    do {
      std::vector<int> key = y;
      key.insert(key.end(), x.begin(), x.end());
      const double p = std::exp(oracle::chain_score(m, th, y, x, {}) - logz);
      CHECK(std::abs(counts[key] / n - p) <= 4 * std::sqrt(p * (1 - p) / n) + 1e-12);
    } while (oracle::next_config(x, 2));
  } while (oracle::next_config(y, 2));
}
