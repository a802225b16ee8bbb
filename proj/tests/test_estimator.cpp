#include "doctest.h"

#include "scl/estimator.hpp"
#include "scl/optimizer.hpp"
#include "scl/sampling.hpp"
#include "scl/synthetic.hpp"

#include <cmath>

using namespace scl;

namespace {

Vector alternating_theta() { return (Vector(10) << -1, -1, -1, -1, -1, 1, 1, 1, 1, 1).finished(); }

}  // namespace

TEST_CASE("optimizer on a concave quadratic") {
  Matrix A(3, 3);
  A << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Vector b = (Vector(3) << 1, -2, 0.5).finished();
  const Vector opt = A.ldlt().solve(b);
  for (Method method : {Method::bfgs, Method::lbfgs, Method::gradient_ascent}) {
    OptimizerConfig cfg;
    cfg.method = method;
    cfg.max_iterations = 5000;
    cfg.gradient_tolerance = 1e-9;
    auto res = maximize(
        [&](const Vector& x, Vector& g) {
          g = b - A * x;
          return b.dot(x) - 0.5 * x.dot(A * x);
        },
        Vector::Zero(3), cfg);
    INFO(to_string(method), " iterations ", res.iterations);
    CHECK(res.converged);
    CHECK((res.x - opt).cwiseAbs().maxCoeff() < 1e-7);
    for (std::size_t i = 1; i < res.trace.size(); ++i) CHECK(res.trace[i] >= res.trace[i - 1] - 1e-12);
  }
}

TEST_CASE("optimizer reports divergence") {
  OptimizerConfig cfg;
  CHECK_THROWS_AS(maximize(
                      [](const Vector& x, Vector& g) {
                        g = Vector::Constant(1, 1.0);
                        return x[0] == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
                      },
                      Vector::Zero(1), cfg),
                  DivergenceError);
}

TEST_CASE("FL fit recovers theta0") {
  Model m = Model::boltzmann_machine(5);
  Dataset d = sample_exact(m, alternating_theta(), 10000, 101);
  FitResult r = fit(m, d, ComponentSet::full_likelihood(m), IndicatorMatrix::ones(d.size(), 1), {});
  CHECK(r.converged);
  CHECK(r.gradient_norm <= 1e-5);
  CHECK((r.theta_hat - alternating_theta()).cwiseAbs().maxCoeff() < 0.15);
  for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-12);
}

TEST_CASE("PL1 fit on data from theta = 0") {
  Model m = Model::boltzmann_machine(5);
  Dataset d = sample_exact(m, Vector::Zero(10), 100000, 55);
  ComponentSet c = ComponentSet::pseudo_likelihood(m, 1);
  FitResult r = fit(m, d, c, IndicatorMatrix::ones(d.size(), c.size()), {});
  CHECK(r.converged);
  CHECK(r.theta_hat.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("fit is invariant to beta scaling and deterministic") {
  Model m = Model::boltzmann_machine(5);
  Dataset d = sample_exact(m, alternating_theta(), 500, 8);
  PolicySpec s = parse_policy(m, "0.7PL1+0.3PL2");
  const auto z = draw_indicators(s.policy, d.size(), 9);
  FitConfig cfg;
  cfg.gradient_tolerance = 1e-9;
  FitResult a = fit(m, d, s.components, z, cfg);
  FitResult b = fit(m, d, s.components.with_beta(2.0 * s.components.beta()), z, cfg);
  FitResult h = fit(m, d, s.components.with_beta(0.5 * s.components.beta()), z, cfg);
  CHECK((a.theta_hat - b.theta_hat).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((a.theta_hat - h.theta_hat).cwiseAbs().maxCoeff() < 1e-6);
  FitResult again = fit(m, d, s.components, z, cfg);
  CHECK(again.theta_hat == a.theta_hat);
  CHECK(again.objective_trace == a.objective_trace);
}

TEST_CASE("regularizer shrinks the estimate") {
  Model m = Model::boltzmann_machine(5);
  Dataset d = sample_exact(m, alternating_theta(), 200, 4);
  ComponentSet c = ComponentSet::pseudo_likelihood(m, 1);
  const auto z = IndicatorMatrix::ones(d.size(), c.size());
  FitConfig tight, loose;
  tight.sigma2 = 1.0;
  loose.sigma2 = 100.0;
  CHECK(fit(m, d, c, z, tight).theta_hat.norm() <= fit(m, d, c, z, loose).theta_hat.norm());
}

TEST_CASE("separable data drives the unregularized estimate outward") {
  Model m = Model::boltzmann_machine(3);
  Dataset d{{Sample{{1, 1, 1}, {}}, Sample{{1, 1, 1}, {}}}};
  ComponentSet c = ComponentSet::full_likelihood(m);
  FitResult free = fit(m, d, c, IndicatorMatrix::ones(2, 1), {});
  FitConfig reg;
  reg.sigma2 = 1.0;
  FitResult pen = fit(m, d, c, IndicatorMatrix::ones(2, 1), reg);
  // The supremum of the likelihood is approached only as theta grows without bound.
  CHECK(free.objective > -1e-3);
  CHECK(free.theta_hat.minCoeff() > 3.0);
  CHECK(pen.theta_hat.maxCoeff() < free.theta_hat.minCoeff());
}

TEST_CASE("consistency on increasing sample sizes") {
  Model m = Model::boltzmann_machine(5);
  ComponentSet c = ComponentSet::pseudo_likelihood(m, 1);
  std::vector<double> errors;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    std::vector<double> e;
    for (int rep = 0; rep < 5; ++rep) {
      Dataset d = sample_exact(m, alternating_theta(), n, 500 + rep + n);
      FitConfig cfg;
      cfg.sigma2 = 1e6;
      e.push_back((fit(m, d, c, IndicatorMatrix::ones(n, 5), cfg).theta_hat - alternating_theta()).norm());
    }
    std::sort(e.begin(), e.end());
    errors.push_back(e[2]);
  }
  CHECK(errors[0] > errors[1]);
  CHECK(errors[1] > errors[2]);
}

TEST_CASE("auto beta") {
  Model m = Model::boltzmann_machine(5);
  Dataset d = sample_exact(m, alternating_theta(), 2000, 33);

  SUBCASE("single component equals a plain fit") {
    ComponentSet fl = ComponentSet::full_likelihood(m);
    FitConfig cfg;
    cfg.seed = 4;
    AutoBetaResult a = fit_auto_beta(m, d, fl, SelectionPolicy::always(1), cfg);
    FitResult p = fit(m, d, fl, IndicatorMatrix::ones(d.size(), 1), cfg);
    CHECK(a.beta == fl.beta());
    CHECK(a.fit.theta_hat == p.theta_hat);
  }
  SUBCASE("J does not increase across beta updates") {
    PolicySpec s = parse_policy(m, "0.7PL1+0.3PL2");
    FitConfig cfg;
    cfg.seed = 5;
    AutoBetaConfig ac;
    ac.constraints.groups = s.term;
    AutoBetaResult a = fit_auto_beta(m, d, s.components, s.policy, cfg, ac);
    REQUIRE(!a.j_before.empty());
    for (std::size_t i = 0; i < a.j_before.size(); ++i) CHECK(a.j_after[i] <= a.j_before[i] + 1e-12);
    double group_sum = 0.0;
    for (int g : {0, 1})
      for (std::size_t j = 0; j < s.term.size(); ++j)
        if (s.term[j] == g) {
          group_sum += a.beta[j];
          break;
        }
    CHECK(std::abs(group_sum - 1.0) < 1e-12);
    CHECK(a.rounds >= 1);
  }
}

TEST_CASE("mean log-likelihood of a CRF is conditional") {
  Model m = Model::linear_chain_crf(2, 2, {{0, 0}, {1, 1}});
  Dataset d{{Sample{{0, 1}, {{0}, {1}}}}};
  CHECK(mean_log_likelihood(m, Vector::Zero(m.num_params()), d) == doctest::Approx(-2 * std::log(2.0)));
}
