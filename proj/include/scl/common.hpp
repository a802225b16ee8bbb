#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace scl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Wrong vector length, out-of-range state, mismatched matrix shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on arguments was violated (invalid m-pair, bad lambda, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Exact computation would exceed the enumeration cap.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Joint configurations above this count are refused by exact enumeration.
/// Reads SCL_ENUM_CAP from the environment, defaulting to 2^25.
std::uint64_t enumeration_cap();

/// log(sum(exp(v))) with the max shift; -inf for an empty range.
double log_sum_exp(const double* v, std::size_t n);
inline double log_sum_exp(const std::vector<double>& v) { return log_sum_exp(v.data(), v.size()); }

}  // namespace scl
