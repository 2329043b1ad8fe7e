#pragma once

#include <stdexcept>
#include <string>

namespace qkd {

/// Inputs outside the physical domain of a model (P > 1, P = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The multi-photon rate reaches Bob's detection rate: no key survives a PNS attack.
class SecurityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No intensity in the search interval yields positive secure gain.
class EmptyWindow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Reconciled keys still differ after the integrity check.
class ResidualErrors : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched record streams or key lengths.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace qkd
