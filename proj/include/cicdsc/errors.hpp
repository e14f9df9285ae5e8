#pragma once

#include <stdexcept>
#include <string>

namespace cicdsc {

// Input or configuration problems: bad files, bad schemas, undersized cells.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// The data passed validation but an estimator could not produce a result.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

// The simplex solver hit its iteration cap before meeting tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, double last_objective,
                   double gradient_norm, int iterations)
      : std::runtime_error(msg),
        last_objective(last_objective),
        gradient_norm(gradient_norm),
        iterations(iterations) {}

  double last_objective;
  double gradient_norm;
  int iterations;
};

}  // namespace cicdsc
