#pragma once

#include <stdexcept>
#include <string>

namespace mfrom {

// Invalid user configuration (mesh sizes, parameter ranges, config files).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Missing boundary tags, wrong layout, inconsistent operator sizes.
class AssemblyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Parameter outside the admissible domain of a model.
class DomainError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Sparse factorization failure of a full-order system.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Dense linear algebra failure: rank deficiency, singular reduced systems.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace mfrom
