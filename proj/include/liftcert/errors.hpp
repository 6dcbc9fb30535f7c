#pragma once

#include <stdexcept>
#include <string>

namespace liftcert {

/// Operands disagree on (K, S), tensor size, or matrix dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A parameter tuple has a zero factor, so it has no class in h_S*.
class ZeroFactorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Structural violation found while validating a network description.
class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or semantically invalid input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace liftcert
