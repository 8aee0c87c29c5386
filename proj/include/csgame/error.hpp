#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csgame {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExpressionError : public Error {
 public:
  enum class Kind { kSyntax, kUnknownIdentifier, kArity, kDomain };

  ExpressionError(Kind kind, std::size_t offset, const std::string& what)
      : Error(what), kind_(kind), offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  /// Byte offset into the source text (0 for evaluation errors).
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Malformed or inconsistent problem configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problem data violates an identity the construction relies on.
class DataError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  enum class Kind { kLinearSolve, kMaxIterations, kDivergence, kNonFiniteSource, kBracketing };

  SolverError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace csgame
