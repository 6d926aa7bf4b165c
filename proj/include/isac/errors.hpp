#pragma once

#include <stdexcept>
#include <string>

namespace isac {

/// Operand shapes do not agree (e.g. K x N channel against an M x L block).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Channel Gram matrix H H^H cannot be inverted.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sphere projection requested at the origin with no admissible fallback.
class DegenerateProjectionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A problem or experiment description violates its invariants.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace isac
