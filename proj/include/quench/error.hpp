#pragma once

#include <stdexcept>
#include <string>

namespace quench {

// Base for every error raised by the library. Derived types exist so callers
// (mainly the harness) can tell validation problems from numerical failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Dense 2^N objects are refused above this many sites.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace quench
