#pragma once

#include "scl/asymptotics.hpp"

namespace scl {

enum class JMode { exact, diagonal };
/// Which Sigma enters J: the deterministic-weight form or the one using the
/// policy's second moments E[Z_i Z_j].
enum class SigmaVariant { formula, selection };

struct BetaObjective {
  const ScoreCov* cov = nullptr;
  SelectionPolicy policy;
  JMode mode = JMode::diagonal;
  SigmaVariant variant = SigmaVariant::formula;
  /// Damping for alternating fits: beta <- (1 - gamma) beta_old + gamma beta_new.
  double gamma = 1.0;
};

/// J(beta) = log det Sigma - 2 log det Upsilon^-1.
double j_exact(const BetaObjective& obj, const Vector& beta);
/// J with each log det replaced by the sum of the logs of the diagonal.
double j_approx(const BetaObjective& obj, const Vector& beta);
/// j_exact or j_approx according to obj.mode.
double j_value(const BetaObjective& obj, const Vector& beta);

struct BetaConstraints {
  /// Optional group id per component; components in a group share one weight.
  std::vector<int> groups;
  double min_weight = 1e-4;
  int max_sweeps = 100;
  double tolerance = 1e-10;
};

struct BetaResult {
  Vector beta;
  double j_init = 0.0;
  double j_final = 0.0;
  bool improved = false;  // false: no descent found, beta is the (normalized) input
  int sweeps = 0;
};

/// Coordinate descent over the group weights on the simplex, one
/// golden-section line search per coordinate. With a single group the input
/// is returned unchanged; otherwise the weights are normalized to sum to 1.
BetaResult optimize_beta(const BetaObjective& obj, const Vector& beta_init, const BetaConstraints& constraints = {});

struct GersgorinDiagnostic {
  Vector centers;
  Vector radii;
  /// overlaps[i]: indices of the other discs that intersect disc i.
  std::vector<std::vector<int>> overlaps;
  bool disjoint(int i) const { return overlaps[i].empty(); }
  /// True when x lies in the union of discs (real line).
  bool covers(double x) const;
};

GersgorinDiagnostic gersgorin(const Matrix& a);

}  // namespace scl
