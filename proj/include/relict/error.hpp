#pragma once

#include <stdexcept>
#include <string>

namespace relict {

/// Hard failure: bad input, broken invariant, unreadable data.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transient failure of an external provider (transport error, 5xx, timeout).
/// Callers may retry the same request.
class RetryableError : public Error {
 public:
  using Error::Error;
};

}  // namespace relict
