#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace bracket_reach {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the domain box.  `exit_time` is the flow time at which
/// the last accepted step was still inside; `atom` and `factor` locate the
/// offending flow inside a program or endpoint map when known.
class DomainEscape : public Error {
 public:
  DomainEscape(const std::string& what, double exit_time)
      : Error(what), exit_time(exit_time) {}
  double exit_time;
  std::optional<std::size_t> atom;
  std::optional<std::size_t> factor;
};

class StepUnderflow : public Error {
 public:
  using Error::Error;
  std::optional<std::size_t> atom;
};

/// A schedule was evaluated outside its domain (SignedRoot with t + a < 0).
class ScheduleDomain : public Error {
 public:
  using Error::Error;
};

class FrameDeficient : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double best_residual)
      : Error(what), best_residual(best_residual) {}
  double best_residual;
};

class HypercubeExhausted : public Error {
 public:
  using Error::Error;
};

class LeafMismatch : public Error {
 public:
  using Error::Error;
};

class Stalled : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + msg),
        line(line),
        column(column) {}
  int line;
  int column;
};

class UnknownScenario : public Error {
 public:
  using Error::Error;
};

}  // namespace bracket_reach
