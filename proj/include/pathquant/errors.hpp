#pragma once

#include <stdexcept>
#include <string>

namespace pathquant {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point fell outside the interior of its chart box.
class ChartDomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The symplectic matrix is numerically singular at the requested point.
class DegenerateFormError : public Error {
 public:
  using Error::Error;
};

/// A path segment left the domain of the local potential assigned to it.
class PartitionDomainError : public Error {
 public:
  using Error::Error;
};

class DegreeError : public Error {
 public:
  using Error::Error;
};

/// A spanning surface does not trace the loop it is supposed to span.
class BoundaryMismatchError : public Error {
 public:
  using Error::Error;
};

class NonCompactDomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SuiteUnknownError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathquant
