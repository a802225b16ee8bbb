#include "doctest.h"

#include "scl/asymptotics.hpp"
#include "scl/beta_select.hpp"
#include "scl/rng.hpp"
#include "scl/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace scl;

namespace {

Vector alternating_theta() { return (Vector(10) << -1, -1, -1, -1, -1, 1, 1, 1, 1, 1).finished(); }

struct Mixed {
  Model model = Model::boltzmann_machine(5);
  PolicySpec spec = parse_policy(model, "0.7PL1+0.3PL2");
  ScoreCov cov = score_cov(model, alternating_theta(), spec.components);
};

Vector group_beta(const std::vector<int>& term, double b1) {
  Vector b(term.size());
  for (std::size_t j = 0; j < term.size(); ++j) b[j] = term[j] == 0 ? b1 : 1.0 - b1;
  return b;
}

}  // namespace

TEST_CASE("J for a single component") {
  Model m = Model::boltzmann_machine(5);
  ComponentSet fl = ComponentSet::full_likelihood(m);
  ScoreCov c = score_cov(m, alternating_theta(), fl);
  BetaObjective obj{&c, SelectionPolicy::always(1), JMode::exact};
  const double j1 = j_exact(obj, Vector::Constant(1, 1.0));
  CHECK(std::abs(j1 - j_exact(obj, Vector::Constant(1, 3.0))) < 1e-10);
  CHECK(std::abs(j1 - log_det_spd(mle_variance(c), "I^-1")) < 1e-9);
  BetaResult r = optimize_beta(obj, Vector::Constant(1, 2.0));
  CHECK(r.beta[0] == 2.0);
}

TEST_CASE("J is scale invariant") {
  Mixed x;
  for (SigmaVariant v : {SigmaVariant::formula, SigmaVariant::selection}) {
    BetaObjective obj{&x.cov, x.spec.policy, JMode::exact, v};
    const Vector b = group_beta(x.spec.term, 0.3);
    CHECK(std::abs(j_exact(obj, b) - j_exact(obj, 4.0 * b)) < 1e-10);
    CHECK(std::abs(j_approx(obj, b) - j_approx(obj, 0.1 * b)) < 1e-10);
  }
}

TEST_CASE("Hadamard bound on the Sigma part") {
  Mixed x;
  BetaObjective obj{&x.cov, x.spec.policy};
  for (double b1 : {0.1, 0.5, 0.9}) {
    const Vector b = group_beta(x.spec.term, b1);
    const Vector w = b.cwiseProduct(x.spec.policy.lambda);
    const Matrix sigma = x.cov.weighted_blocks(w * w.transpose());
    const Vector d = sigma.diagonal();
    CHECK(d.array().log().sum() >= log_det_spd(sigma, "Sigma") - 1e-12);
  }
}

TEST_CASE("j_approx equals j_exact on a diagonal score covariance") {
  // Independent variables: every score block is diagonal.
  Model m = Model::generic({2, 2, 2}, {{0}, {1}, {2}});
  const Vector th = (Vector(3) << 0.3, -0.7, 1.1).finished();
  PolicySpec s = parse_policy(m, "0.6PL1+0.4PL2");
  ScoreCov c = score_cov(m, th, s.components);
  BetaObjective obj{&c, s.policy};
  for (double b1 : {0.2, 0.5, 0.8}) {
    const Vector b = group_beta(s.term, b1);
    CHECK(std::abs(j_approx(obj, b) - j_exact(obj, b)) < 1e-10);
  }
}

TEST_CASE("diagonal approximation tracks the exact argmin") {
  Mixed x;
  for (SigmaVariant v : {SigmaVariant::formula, SigmaVariant::selection}) {
    BetaObjective obj{&x.cov, x.spec.policy, JMode::exact, v};
    double best_e = INFINITY, best_a = INFINITY, arg_e = 0, arg_a = 0;
    for (int i = 1; i < 20; ++i) {
      const double b1 = 0.05 * i;
      const Vector b = group_beta(x.spec.term, b1);
      const double je = j_exact(obj, b), ja = j_approx(obj, b);
      if (je < best_e) best_e = je, arg_e = b1;
      if (ja < best_a) best_a = ja, arg_a = b1;
    }
    CHECK(std::abs(arg_e - arg_a) <= 0.1 + 1e-12);
  }
}

TEST_CASE("approximation error shrinks with off-diagonal mass") {
  Mixed x;
  BetaObjective obj{&x.cov, x.spec.policy};
  const Vector b = group_beta(x.spec.term, 0.5);
  const Vector w = b.cwiseProduct(x.spec.policy.lambda);
  const Matrix sigma = x.cov.weighted_blocks(w * w.transpose());
  const Matrix ups = x.cov.weighted_diagonal_blocks(w);
  double prev = INFINITY;
  for (double t : {1.0, 0.75, 0.5, 0.25, 0.0}) {
    auto shrink = [t](const Matrix& a) {
      Matrix d = a.diagonal().asDiagonal();
      return Matrix(d + t * (a - d));
    };
    const Matrix s = shrink(sigma), u = shrink(ups);
    const double exact = log_det_spd(s, "S") - 2 * log_det_spd(u, "U");
    const double approx = s.diagonal().array().log().sum() - 2 * u.diagonal().array().log().sum();
    const double gap = std::abs(approx - exact);
    CHECK(gap <= prev + 1e-12);
    prev = gap;
  }
  CHECK(prev < 1e-12);
}

TEST_CASE("optimize_beta") {
  Mixed x;
  BetaObjective obj{&x.cov, x.spec.policy, JMode::exact};
  BetaConstraints cons;
  cons.groups = x.spec.term;
  const Vector init = group_beta(x.spec.term, 0.5);
  BetaResult r = optimize_beta(obj, init, cons);
  CHECK(r.j_final <= r.j_init + 1e-12);
  // Group weights (one per policy term) sum to one.
  CHECK(std::abs(r.beta[0] + r.beta[r.beta.size() - 1] - 1.0) < 1e-12);
  BetaResult scaled = optimize_beta(obj, 7.0 * init, cons);
  CHECK((scaled.beta - r.beta).cwiseAbs().maxCoeff() < 1e-12);
  BetaResult again = optimize_beta(obj, init, cons);
  CHECK(again.beta == r.beta);
}

TEST_CASE("weight moves toward the less noisy component") {
  // FL against PL1 at theta = 0; the full likelihood is the efficient one.
  Model m = Model::boltzmann_machine(3);
  ComponentSet two = ComponentSet::concat(ComponentSet::full_likelihood(m), ComponentSet::pseudo_likelihood(m, 1));
  ScoreCov c = score_cov(m, Vector::Zero(3), two);
  BetaObjective obj{&c, SelectionPolicy::always(two.size()), JMode::exact};
  BetaConstraints cons;
  cons.groups = {0, 1, 1, 1};
  BetaResult r = optimize_beta(obj, Vector::Ones(4), cons);
  CHECK(r.j_final < r.j_init);
  CHECK(r.beta[0] > r.beta[1]);
}

TEST_CASE("Gersgorin discs") {
  SUBCASE("diagonal") {
    Matrix d = Vector::LinSpaced(4, 1, 4).asDiagonal();
    GersgorinDiagnostic g = gersgorin(d);
    CHECK(g.radii.isZero());
    CHECK(g.centers == Vector::LinSpaced(4, 1, 4));
    for (int i = 0; i < 4; ++i) CHECK(g.disjoint(i));
  }
  SUBCASE("2 x 2") {
    Matrix a(2, 2);
    a << 2, 1, 1, 2;
    GersgorinDiagnostic g = gersgorin(a);
    CHECK(g.covers(1.0));
    CHECK(g.covers(3.0));
    CHECK(!g.covers(3.5));
    CHECK(!g.disjoint(0));
  }
  SUBCASE("random symmetric") {
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
      Matrix a(10, 10);
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = 2 * rng.uniform() - 1 + (i == j ? 3 * rng.uniform() : 0);
      GersgorinDiagnostic g = gersgorin(a);
      CHECK((g.radii.array() >= 0).all());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
      for (int i = 0; i < 10; ++i) CHECK(g.covers(eig.eigenvalues()[i]));
    }
  }
}

TEST_CASE("plug-in J from an empirical covariance") {
  Mixed x;
  const std::size_t n = 100000;
  Dataset d = sample_exact(x.model, alternating_theta(), n, 3);
  ScoreCov emp = score_cov(x.model, alternating_theta(), x.spec.components, d);
  BetaObjective exact{&x.cov, x.spec.policy};
  BetaObjective plug{&emp, x.spec.policy};
  const Vector b = group_beta(x.spec.term, 0.5);
  CHECK(std::abs(j_approx(plug, b) - j_approx(exact, b)) <= 0.02 * std::abs(j_approx(exact, b)));
}
