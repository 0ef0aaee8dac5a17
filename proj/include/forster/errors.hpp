#pragma once

#include <stdexcept>
#include <string>

namespace forster {

/// Input outside an operation's domain (negative distance, r = r_j, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge or violated a checked invariant.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: parse errors, unknown keys, invariant violations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace forster
