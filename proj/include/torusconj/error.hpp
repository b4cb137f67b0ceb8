#pragma once

#include <stdexcept>
#include <string>

namespace torusconj {

/// Base class for every error raised by the library. Verification failures
/// are reported as verdicts, never as exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation's precondition does not hold for its input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Raised by numerical routines whose certified regime does not apply.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace torusconj
