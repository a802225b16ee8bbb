#include "doctest.h"
#include "oracles.hpp"

#include "scl/asymptotics.hpp"
#include "scl/inference.hpp"
#include "scl/rng.hpp"
#include "scl/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace scl;

namespace {

Vector alternating_theta() { return (Vector(10) << -1, -1, -1, -1, -1, 1, 1, 1, 1, 1).finished(); }

Vector random_theta(int r, std::uint64_t seed) {
  Rng rng(seed);
  Vector t(r);
  for (int i = 0; i < r; ++i) t[i] = 2.0 * rng.uniform() - 1.0;
  return t;
}

double rel_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

AsymReport report(const Model& m, const Vector& th, const std::string& expr) {
  PolicySpec s = parse_policy(m, expr);
  return asymptotic_variance(score_cov(m, th, s.components), s.policy, s.components.beta());
}

}  // namespace

TEST_CASE("score covariance of FL is the Fisher information") {
  Model m = Model::boltzmann_machine(2);
  ScoreCov c = score_cov(m, Vector::Zero(1), ComponentSet::full_likelihood(m));
  CHECK(std::abs(c.block(0, 0)(0, 0) - 0.1875) < 1e-12);
  REQUIRE(c.fisher());
  CHECK(std::abs((*c.fisher())(0, 0) - 0.1875) < 1e-12);

  Model m5 = Model::boltzmann_machine(5);
  ScoreCov c5 = score_cov(m5, alternating_theta(), ComponentSet::full_likelihood(m5));
  CHECK((c5.block(0, 0) - oracle::bm_fisher(5, alternating_theta())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("score covariance blocks") {
  Model m = Model::boltzmann_machine(4);
  const ComponentSet c = ComponentSet::concat(ComponentSet::pseudo_likelihood(m, 1), ComponentSet::pseudo_likelihood(m, 2));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ScoreCov k = score_cov(m, random_theta(6, seed), c);
    for (int i = 0; i < k.num_components(); ++i) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(k.block(i, i));
      CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
      for (int j = 0; j < k.num_components(); ++j) {
        CHECK((k.block(i, j) - k.block(j, i).transpose()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((k.block(i, j).diagonal() - k.block_diagonal(i, j)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("empirical score covariance converges to the exact one") {
  Model m = Model::boltzmann_machine(4);
  const Vector th = random_theta(6, 12);
  const ComponentSet c = ComponentSet::pseudo_likelihood(m, 1);
  const std::size_t n = 100000;
  ScoreCov exact = score_cov(m, th, c);
  ScoreCov emp = score_cov(m, th, c, sample_exact(m, th, n, 77));
  for (int i = 0; i < c.size(); ++i)
    for (int j = 0; j < c.size(); ++j) {
      const Matrix e = exact.block(i, j), g = emp.block(i, j);
      const Matrix a = exact.block(i, i), b = exact.block(j, j);
      for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q) {
          const double se = std::sqrt((a(p, p) * b(q, q) + e(p, q) * e(p, q)) / n);
          CHECK(std::abs(g(p, q) - e(p, q)) <= 5 * se + 1e-12);
        }
    }
  CHECK(emp.source() == CovSource::empirical);
}

TEST_CASE("full likelihood reaches the Cramer-Rao bound") {
  Model m = Model::boltzmann_machine(5);
  const Vector th = alternating_theta();
  AsymReport r = report(m, th, "FL");
  const Matrix inv = oracle::bm_fisher(5, th).inverse();
  CHECK(rel_frobenius(r.variance, inv) < 1e-10);
  REQUIRE(r.eff);
  CHECK(std::abs(*r.eff - 1.0) < 1e-10);
}

TEST_CASE("efficiency is at least one for every policy") {
  Model m = Model::boltzmann_machine(5);
  for (std::uint64_t seed : {0u, 1u, 2u})
    for (const char* expr : {"PL1", "PL2", "PL3", "0.7PL1+0.3PL2", "0.2PL1+PL3", "0.5FL+0.5PL1"}) {
      const Vector th = seed == 0 ? alternating_theta() : random_theta(10, seed);
      AsymReport r = report(m, th, expr);
      CHECK(*r.eff >= 1 - 1e-9);
      CHECK(*r.eff_selection >= 1 - 1e-9);
    }
}

TEST_CASE("single component variance does not depend on beta") {
  Model m = Model::boltzmann_machine(4);
  ComponentSet fl = ComponentSet::full_likelihood(m);
  ScoreCov c = score_cov(m, random_theta(6, 5), fl);
  const auto pol = SelectionPolicy::independence(Vector::Constant(1, 0.4));
  const Matrix a = asymptotic_variance(c, pol, Vector::Constant(1, 1.0)).variance;
  const Matrix b = asymptotic_variance(c, pol, Vector::Constant(1, 7.5)).variance;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10 * a.cwiseAbs().maxCoeff());
  CHECK(rel_frobenius(a, c.block(0, 0).inverse()) < 1e-10);
}

TEST_CASE("variance is invariant to scaling beta") {
  Model m = Model::boltzmann_machine(5);
  PolicySpec s = parse_policy(m, "0.7PL1+0.3PL2");
  ScoreCov c = score_cov(m, alternating_theta(), s.components);
  Vector beta = s.components.beta();
  for (int j = 0; j < beta.size(); ++j) beta[j] = 0.5 + 0.1 * j;
  AsymReport a = asymptotic_variance(c, s.policy, beta);
  for (double k : {0.01, 3.0, 250.0}) {
    AsymReport b = asymptotic_variance(c, s.policy, k * beta);
    CHECK((a.variance - b.variance).cwiseAbs().maxCoeff() < 1e-10 * a.variance.cwiseAbs().maxCoeff());
    CHECK((a.variance_selection - b.variance_selection).cwiseAbs().maxCoeff() <
          1e-10 * a.variance_selection.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("higher selection probability lowers the variance") {
  Model m = Model::boltzmann_machine(5);
  double prev = INFINITY;
  for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    std::string expr = std::to_string(a) + "PL2+" + std::to_string(1 - a) + "PL1";
    AsymReport r = report(m, alternating_theta(), expr);
    CHECK(*r.eff < prev);
    prev = *r.eff;
  }
}

TEST_CASE("singular bread names the null directions") {
  Model m = Model::boltzmann_machine(3);
  ComponentSet c = ComponentSet::custom(m, {{{0}, {1}}});
  ScoreCov k = score_cov(m, Vector::Zero(3), c);
  try {
    asymptotic_variance(k, SelectionPolicy::always(1), Vector::Ones(1));
    FAIL("expected SingularError");
  } catch (const SingularError& e) {
    CHECK(std::string(e.what()).find("theta_") != std::string::npos);
  }
}

TEST_CASE("efficiency ratios") {
  Matrix a = Matrix::Identity(3, 3) * 2.0;
  EfficiencyRatio r = efficiency(a, Matrix::Identity(3, 3));
  CHECK(r.determinant == doctest::Approx(8.0));
  CHECK(r.trace == doctest::Approx(2.0));
  CHECK_THROWS(efficiency(-a, Matrix::Identity(3, 3)));
}

TEST_CASE("sandwich under a well-specified truth") {
  Model m = Model::boltzmann_machine(4);
  const Vector th = random_theta(6, 19);
  TrueDistribution truth = TrueDistribution::from_model(m, th);

  SUBCASE("FL gives the inverse Fisher information") {
    RobustReport r = sandwich_variance(m, ComponentSet::full_likelihood(m), SelectionPolicy::always(1), truth);
    const Matrix fisher = oracle::bm_fisher(4, th);
    CHECK((r.theta0 - th).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(r.residual < 1e-7);
    CHECK((r.bread + fisher).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((r.meat - fisher).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(rel_frobenius(r.sandwich, fisher.inverse()) < 1e-8);
  }
  SUBCASE("mixed policy matches the selection-moment variance") {
    PolicySpec s = parse_policy(m, "0.6PL1+0.3PL2");
    RobustReport r = sandwich_variance(m, s.components, s.policy, truth);
    AsymReport a = asymptotic_variance(score_cov(m, th, s.components), s.policy, s.components.beta());
    CHECK(r.residual < 1e-7);
    CHECK(rel_frobenius(r.sandwich, a.variance_selection) < 1e-8);
  }
}

TEST_CASE("sandwich under a misspecified truth") {
  Model m = Model::boltzmann_machine(3);
  TrueDistribution truth = TrueDistribution::from_log_weights(
      {2, 2, 2}, [](const std::vector<int>& x) { return 0.5 * x[0] * x[1] - 0.4 * x[1] * x[2] + 1.5 * x[0] * x[1] * x[2]; });
  RobustReport r = sandwich_variance(m, ComponentSet::pseudo_likelihood(m, 1), SelectionPolicy::always(3), truth);
  CHECK(r.residual < 1e-7);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(r.sandwich);
  CHECK(eig.eigenvalues().minCoeff() > 0);
  CHECK((r.sandwich - r.sandwich.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("influence function") {
  Model m = Model::boltzmann_machine(3);
  const Vector th = random_theta(3, 2);
  PolicySpec s = parse_policy(m, "0.5PL1+0.5PL2");
  RobustReport r = sandwich_variance(m, s.components, s.policy, TrueDistribution::from_model(m, th));
  const Sample x{{1, 0, 1}, {}};
  CHECK(influence(r, x, std::vector<std::uint8_t>(s.components.size(), 0), 10).isZero());
  const std::vector<std::uint8_t> z(s.components.size(), 1);
  const Vector a = influence(r, x, z, 100), b = influence(r, x, z, 400);
  CHECK((a - 4.0 * b).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(a.norm() > 0);
}

TEST_CASE("weighted conditional KL divergence is non-negative") {
  Model m = Model::boltzmann_machine(3);
  ComponentSet c = ComponentSet::pseudo_likelihood(m, 1);
  Rng rng(5);
  auto kl = [&](const Vector& a, const Vector& b, const Vector& alpha) {
    const auto p = oracle::bm_table(3, a);
    double s = 0.0;
    for (unsigned code = 0; code < 8; ++code) {
      const Sample x{oracle::bits(3, code), {}};
      for (int j = 0; j < c.size(); ++j)
        s += alpha[j] * p[code] *
             (conditional_log_prob(m, a, c[j].pair, x) - conditional_log_prob(m, b, c[j].pair, x));
    }
    return s;
  };
  for (int t = 0; t < 50; ++t) {
    const Vector a = random_theta(3, rng.next()), b = random_theta(3, rng.next());
    Vector alpha(3);
    for (int j = 0; j < 3; ++j) alpha[j] = 0.1 + rng.uniform();
    CHECK(kl(a, b, alpha) > 0);
    CHECK(std::abs(kl(a, a, alpha)) < 1e-12);
  }
}
