#include "scl/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace scl {

std::string to_string(Method method) {
  switch (method) {
    case Method::automatic: return "auto";
    case Method::bfgs: return "bfgs";
    case Method::lbfgs: return "lbfgs";
    case Method::gradient_ascent: return "gradient_ascent";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "auto") return Method::automatic;
  if (name == "bfgs") return Method::bfgs;
  if (name == "lbfgs") return Method::lbfgs;
  if (name == "gradient_ascent") return Method::gradient_ascent;
  throw ContractError("unknown optimizer method '" + name + "'");
}

namespace {

bool finite(const Vector& v) { return v.allFinite(); }

double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Two-loop recursion: H * g for the L-BFGS inverse-Hessian approximation of -f.
Vector lbfgs_direction(const std::deque<Vector>& s, const std::deque<Vector>& y, const std::deque<double>& rho,
                       const Vector& g) {
  Vector q = g;
  std::vector<double> alpha(s.size());
  for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) {
    alpha[i] = rho[i] * s[i].dot(q);
    q -= alpha[i] * y[i];
  }
  if (!s.empty()) q *= s.back().dot(y.back()) / y.back().squaredNorm();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double b = rho[i] * y[i].dot(q);
    q += (alpha[i] - b) * s[i];
  }
  return q;
}

}  // namespace

OptimizerResult maximize(const Objective& f, const Vector& x0, const OptimizerConfig& config) {
  if (!(config.gradient_tolerance > 0.0)) throw ContractError("gradient tolerance must be positive");
  const Eigen::Index r = x0.size();
  Method method = config.method;
  if (method == Method::automatic) method = r <= 1000 ? Method::bfgs : Method::lbfgs;

  OptimizerResult res;
  res.x = x0;
  Vector g(r);
  res.value = f(res.x, g);
  ++res.evaluations;
  res.trace.push_back(res.value);
  if (!std::isfinite(res.value) || !finite(g)) throw DivergenceError("objective is not finite at the start", res.trace);

  // Quasi-Newton state for the ascent problem: H approximates (-hess f)^-1.
  Matrix H;
  bool h_scaled = false;
  if (method == Method::bfgs) H = Matrix::Identity(r, r);
  std::deque<Vector> S, Y;
  std::deque<double> rho;

  Vector x_new(r), g_new(r);
  double step_hint = config.line_search.initial_step;
  while (true) {
    res.gradient_norm = sup_norm(g);
    if (res.gradient_norm <= config.gradient_tolerance) {
      res.converged = true;
      break;
    }
    if (res.iterations >= config.max_iterations) break;

    Vector d;
    switch (method) {
      case Method::bfgs: d = H * g; break;
      case Method::lbfgs: d = lbfgs_direction(S, Y, rho, g); break;
      default: d = g; break;
    }
    double slope = g.dot(d);
    if (!(slope > 0.0)) {
      // Lost the ascent property; restart from steepest ascent.
      if (method == Method::bfgs) {
        H.setIdentity();
        h_scaled = false;
      }
      S.clear();
      Y.clear();
      rho.clear();
      d = g;
      slope = g.squaredNorm();
    }

    double step = method == Method::gradient_ascent ? step_hint : config.line_search.initial_step;
    if (method != Method::gradient_ascent && S.empty() && !h_scaled) step = std::min(1.0, 1.0 / sup_norm(g));
    const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(res.value));
    bool accepted = false;
    double v_new = 0.0;
    for (int b = 0; b <= config.line_search.max_backtracks; ++b) {
      x_new = res.x + step * d;
      v_new = f(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(v_new) && finite(g_new) &&
          v_new >= res.value + config.line_search.sufficient_increase * step * slope - slack) {
        accepted = true;
        break;
      }
      step *= config.line_search.shrink;
    }
    if (!accepted) {
      if (!std::isfinite(v_new)) throw DivergenceError("objective diverged", res.trace);
      break;  // no ascent possible at working precision
    }

    Vector s = x_new - res.x;
    Vector y = g - g_new;  // gradient change of -f
    res.x = x_new;
    res.value = v_new;
    g = g_new;
    ++res.iterations;
    res.trace.push_back(res.value);
    const double sy = s.dot(y);
    if (method == Method::gradient_ascent) {
      // Barzilai-Borwein step for the next iteration.
      step_hint = sy > 0.0 ? std::min(s.squaredNorm() / sy, 1e6) : std::min(step * 2.0, 1e6);
      continue;
    }
    if (sy <= 1e-12 * s.norm() * y.norm()) continue;
    if (method == Method::bfgs) {
      if (!h_scaled) {
        H = Matrix::Identity(r, r) * (sy / y.squaredNorm());
        h_scaled = true;
      }
      const double p = 1.0 / sy;
      Vector Hy = H * y;
      const double yHy = y.dot(Hy);
      H += ((1.0 + p * yHy) * p) * (s * s.transpose()) - p * (Hy * s.transpose() + s * Hy.transpose());
    } else {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > config.lbfgs_memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
  }
  res.gradient_norm = sup_norm(g);
  if (res.gradient_norm <= config.gradient_tolerance) res.converged = true;
  return res;
}

}  // namespace scl
