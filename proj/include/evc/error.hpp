#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace evc {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A file or document failed schema validation. Carries one message per
/// offending row/field so callers can report them all at once.
class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> diagnostics);

    const std::vector<std::string> &diagnostics() const noexcept { return diagnostics_; }

  private:
    std::vector<std::string> diagnostics_;
};

/// Inconsistent configuration (e.g. a mode without an eligibility rule).
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// The grid program could not be solved (infeasible, unbounded, disconnected).
class GridError : public Error {
  public:
    using Error::Error;
};

} // namespace evc
