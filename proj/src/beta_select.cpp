#include "scl/beta_select.hpp"

#include <cmath>
#include <limits>

namespace scl {

namespace {

void check(const BetaObjective& obj, const Vector& beta) {
  if (!obj.cov) throw ContractError("beta objective has no score covariance");
  if (beta.size() != obj.cov->num_components() || obj.policy.size() != obj.cov->num_components())
    throw DimensionError("beta/policy sizes do not match the score covariance");
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (!(beta[j] > 0.0)) throw ContractError("beta must be positive");
}

Matrix sigma_weights(const BetaObjective& obj, const Vector& beta) {
  if (obj.variant == SigmaVariant::formula) {
    const Vector w = beta.cwiseProduct(obj.policy.lambda);
    return w * w.transpose();
  }
  return beta.asDiagonal() * obj.policy.second_moment() * beta.asDiagonal();
}

double sum_log(const Vector& d, const char* what) {
  double s = 0.0;
  for (Eigen::Index l = 0; l < d.size(); ++l) {
    if (!(d[l] > 0.0)) throw SingularError(std::string("non-positive diagonal entry in ") + what);
    s += std::log(d[l]);
  }
  return s;
}

}  // namespace

double j_exact(const BetaObjective& obj, const Vector& beta) {
  check(obj, beta);
  const Vector w = beta.cwiseProduct(obj.policy.lambda);
  const Matrix ui = obj.cov->weighted_diagonal_blocks(w);
  const Matrix sigma = obj.cov->weighted_blocks(sigma_weights(obj, beta));
  return log_det_spd(0.5 * (sigma + sigma.transpose()), "Sigma") -
         2.0 * log_det_spd(0.5 * (ui + ui.transpose()), "Upsilon^-1");
}

double j_approx(const BetaObjective& obj, const Vector& beta) {
  check(obj, beta);
  const Vector w = beta.cwiseProduct(obj.policy.lambda);
  return sum_log(obj.cov->weighted_blocks_diag(sigma_weights(obj, beta)), "Sigma") -
         2.0 * sum_log(obj.cov->weighted_diagonal_blocks_diag(w), "Upsilon^-1");
}

double j_value(const BetaObjective& obj, const Vector& beta) {
  return obj.mode == JMode::exact ? j_exact(obj, beta) : j_approx(obj, beta);
}

BetaResult optimize_beta(const BetaObjective& obj, const Vector& beta_init, const BetaConstraints& constraints) {
  check(obj, beta_init);
  const int k = static_cast<int>(beta_init.size());
  std::vector<int> group = constraints.groups;
  if (group.empty()) {
    group.resize(k);
    for (int j = 0; j < k; ++j) group[j] = j;
  }
  if (static_cast<int>(group.size()) != k) throw DimensionError("beta group vector has the wrong length");
  int G = 0;
  for (int g : group) {
    if (g < 0) throw ContractError("beta group ids must be non-negative");
    G = std::max(G, g + 1);
  }
  // Group weights: mean beta within each group.
  Vector gw = Vector::Zero(G);
  Vector members = Vector::Zero(G);
  for (int j = 0; j < k; ++j) {
    gw[group[j]] += beta_init[j];
    members[group[j]] += 1.0;
  }
  for (int g = 0; g < G; ++g) {
    if (members[g] == 0.0) throw ContractError("beta group " + std::to_string(g) + " is empty");
    gw[g] /= members[g];
  }

  BetaResult res;
  res.beta = beta_init;
  const auto safe_j = [&](const Vector& b) {
    try {
      const double v = j_value(obj, b);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  res.j_init = safe_j(beta_init);
  res.j_final = res.j_init;
  if (G == 1) return res;

  gw /= gw.sum();
  const Vector gw_init = gw;
  const auto expand = [&](const Vector& w) {
    Vector b(k);
    for (int j = 0; j < k; ++j) b[j] = w[group[j]];
    return b;
  };
  double best = safe_j(expand(gw));
  const double lo = constraints.min_weight;
  const double hi = 1.0 - constraints.min_weight * (G - 1);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);

  for (int sweep = 0; sweep < constraints.max_sweeps; ++sweep) {
    const double start = best;
    for (int g = 0; g < G; ++g) {
      const double rest = 1.0 - gw[g];
      const auto at = [&](double t) {
        Vector w = gw;
        for (int h = 0; h < G; ++h)
          w[h] = h == g ? t : (rest > 0.0 ? gw[h] * (1.0 - t) / rest : (1.0 - t) / (G - 1));
        return w;
      };
      double a = lo, b = hi;
      double c = b - phi * (b - a), d = a + phi * (b - a);
      double fc = safe_j(expand(at(c))), fd = safe_j(expand(at(d)));
      for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
        if (fc <= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - phi * (b - a);
          fc = safe_j(expand(at(c)));
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + phi * (b - a);
          fd = safe_j(expand(at(d)));
        }
      }
      const double t = fc <= fd ? c : d;
      const Vector cand = at(t);
      const double f = safe_j(expand(cand));
      if (f < best) {
        best = f;
        gw = cand;
      }
    }
    res.sweeps = sweep + 1;
    if (start - best <= constraints.tolerance) break;
  }
  if (obj.gamma != 1.0) {
    gw = (1.0 - obj.gamma) * gw_init + obj.gamma * gw;
    best = safe_j(expand(gw));
  }
  if (best <= res.j_init) {
    res.beta = expand(gw);
    res.j_final = best;
    res.improved = best < res.j_init;
  }
  return res;
}

bool GersgorinDiagnostic::covers(double x) const {
  for (Eigen::Index i = 0; i < centers.size(); ++i)
    if (std::abs(x - centers[i]) <= radii[i] * (1.0 + 1e-12) + 1e-12) return true;
  return false;
}

GersgorinDiagnostic gersgorin(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("Gersgorin discs need a square matrix");
  const Eigen::Index n = a.rows();
  GersgorinDiagnostic d;
  d.centers = a.diagonal();
  d.radii = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) d.radii[i] += std::abs(a(i, j));
  d.overlaps.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && std::abs(d.centers[i] - d.centers[j]) <= d.radii[i] + d.radii[j])
        d.overlaps[i].push_back(static_cast<int>(j));
  return d;
}

}  // namespace scl
