#pragma once

#include <stdexcept>
#include <string>

namespace wsseg {

// Error categories map onto the CLI exit scheme:
//   usage/config -> 2, data/format -> 3, numeric failure -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed values that violate an operation's contract.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Tensor/grid dimensions do not line up.
class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// An object was used in a mode or sequence its contract forbids.
class StateError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Run configuration is inconsistent (e.g. disjoint subsets impossible).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// On-disk bytes do not parse as the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or divergence during numerics.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsseg
