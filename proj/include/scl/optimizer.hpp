#pragma once

#include "scl/common.hpp"

#include <functional>

namespace scl {

enum class Method { automatic, bfgs, lbfgs, gradient_ascent };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct LineSearch {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_increase = 1e-4;
  int max_backtracks = 60;
};

struct OptimizerConfig {
  Method method = Method::automatic;  // bfgs up to 1000 parameters, lbfgs above
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;  // sup-norm
  int lbfgs_memory = 10;
  LineSearch line_search;
};

struct OptimizerResult {
  Vector x;
  double value = 0.0;
  std::vector<double> trace;  // objective after each accepted iteration, starting at x0
  bool converged = false;
  double gradient_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Returns f(x) and writes its gradient.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace) : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Maximizes f from x0 by line-search ascent. Throws DivergenceError when the
/// objective or gradient becomes non-finite.
OptimizerResult maximize(const Objective& f, const Vector& x0, const OptimizerConfig& config);

}  // namespace scl
