#pragma once

#include <stdexcept>
#include <string>

namespace tenseg {

// Invalid input parameters (ModuleSpec bounds, solver settings, dt above the
// stability bound).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Graph does not have the topology an operation requires.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite state detected during time integration.
class IntegrationFault : public std::runtime_error {
 public:
  IntegrationFault(const std::string& what, double time)
      : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnfoldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tenseg
