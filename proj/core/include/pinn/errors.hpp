#pragma once

#include <stdexcept>
#include <string>

namespace pinn {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A graph references an input or parameter slot the context does not bind.
class UnboundVariable : public Error {
 public:
  using Error::Error;
};

/// Evaluation or gradient accumulation produced NaN/Inf.
class NonFiniteResult : public Error {
 public:
  using Error::Error;
};

/// Gradient handed to the optimizer contains NaN/Inf.
class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

/// An op without a registered derivative rule was differentiated.
class UnsupportedOp : public Error {
 public:
  using Error::Error;
};

/// Parameter storage layout does not match the requested model shape.
class LayoutMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid grid bounds or counts.
class BadBounds : public Error {
 public:
  using Error::Error;
};

/// Error metric requested for a problem without an analytic solution.
class OracleMissing : public Error {
 public:
  using Error::Error;
};

/// File could not be read/written or has an unreadable format.
class IoError : public Error {
 public:
  using Error::Error;
};

/// compare() invoked on runs of two different problems.
class MismatchedProblems : public Error {
 public:
  using Error::Error;
};

/// Config file diagnostics carry the offending key and line.
class ConfigError : public Error {
 public:
  enum class Kind { UnknownKey, BadValue, MissingProblem };
  ConfigError(Kind kind, const std::string& what, int line = 0)
      : Error(what), kind(kind), line(line) {}
  Kind kind;
  int line;
};

}  // namespace pinn
