#pragma once

#include <stdexcept>
#include <string>

namespace hmmdiv {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Total predictive density underflowed; the filter cannot be renormalized.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

class InvalidModelError : public Error {
 public:
  using Error::Error;
};

class GridTooCoarseError : public Error {
 public:
  GridTooCoarseError(const std::string& what, double worst_column_sum)
      : Error(what), worst_column_sum_(worst_column_sum) {}
  double worst_column_sum() const noexcept { return worst_column_sum_; }

 private:
  double worst_column_sum_;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hmmdiv
