#pragma once

#include <stdexcept>
#include <string>

namespace nlsnpd {

/// A parameter or input lies outside the range where the model is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A requested target value cannot be reached on the chosen branch.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Time integration drifted beyond its conservation tolerance.
class StabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlsnpd
