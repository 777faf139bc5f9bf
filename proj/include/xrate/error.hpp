#pragma once

#include <stdexcept>
#include <string>

namespace xrate {

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input: bad flags, invalid measures, trees, tables.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A computation could not honour its contract: stalls, exceeded caps,
/// violated bounds.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace xrate
