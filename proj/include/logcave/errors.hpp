#pragma once

#include <stdexcept>
#include <string>

namespace logcave {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The affine hull of the input has dimension below the ambient dimension,
/// so the estimator's support would be degenerate.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Structurally invalid input: too few points, duplicate points, bad weights.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A file could not be read, written or parsed at the byte/record level.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A persisted model document does not match the expected schema.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, std::string field_path)
      : Error(message + " (at " + field_path + ")"), field(std::move(field_path)) {}
  std::string field;
};

/// An exponent exceeded the representable range while integrating exp of a
/// tent function; the optimizer treats this as an infinite objective value.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// An EM component concentrated on fewer than d+1 points.
class DegenerateComponent : public Error {
 public:
  using Error::Error;
};

/// Every EM restart ended in a degenerate component.
class AllRestartsDegenerate : public Error {
 public:
  using Error::Error;
};

}  // namespace logcave
