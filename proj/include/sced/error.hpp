#pragma once

#include <stdexcept>
#include <string>

namespace sced {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (bad JSON, bad CSV, unknown unit suffix).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A well-formed document whose values break a domain invariant. `field()`
/// names the offending field, prefixed by the resource id when there is one.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The instance cannot have a feasible dispatch (detected before solving).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace sced
