#pragma once

#include <stdexcept>
#include <string>

namespace tvdopt {

// Invalid setup: bad dimensions, empty schedules, malformed config values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Objective evaluated where it is undefined (e.g. at an agent's own position).
class SingularPointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateCurvatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative numerical procedure failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Message-passing failures in the network simulator.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LocalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tvdopt
