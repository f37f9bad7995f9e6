// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace multiring {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A size parameter is out of its valid domain (n < 2, odd m, ...).
class InvalidSizeError : public Error {
 public:
  using Error::Error;
};

// No Hamiltonian decomposition exists for the requested size (n = 4 or 6).
class NoDecompositionError : public Error {
 public:
  using Error::Error;
};

// Sequence length does not satisfy the divisibility required by a placement.
class DivisibilityError : public Error {
 public:
  using Error::Error;
};

// Two rings claim the same arc while building routing tables.
class ArcConflictError : public Error {
 public:
  using Error::Error;
};

// A schedule's compute sets disagree with the transfer history.
class ScheduleIntegrityError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration (mismatched placement/scheme, bad preset string, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace multiring
