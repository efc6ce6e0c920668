#pragma once

#include <stdexcept>
#include <string>

namespace gesha {

// Malformed or inconsistent input data (instance, scenarios, solution files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration or parameter combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver reached a state that contradicts the model's guarantees.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gesha
