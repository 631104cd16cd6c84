#pragma once

#include <stdexcept>
#include <string>

namespace fpcav {

/// Invalid or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Evaluation at (or numerically at) a resonance pole.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double distance)
      : std::runtime_error(what), distance_(distance) {}
  double distance() const { return distance_; }

 private:
  double distance_;  // relative distance to the pole
};

/// Iterative procedure (quadrature, root search) failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate)
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;  // error estimate at the last iteration
};

}  // namespace fpcav
