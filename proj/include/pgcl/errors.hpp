#ifndef PGCL_ERRORS_HPP
#define PGCL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pgcl {

/// Runtime evaluation failures. The kind is part of the contract: callers
/// (checker, simulator) dispatch on it to classify outcomes.
class EvalError : public std::runtime_error {
public:
  enum class Kind {
    UnboundVariable,
    DivisionByZero,
    NonIntegerArgument,
    NegativeArgument,
    ProbabilityOutOfRange,
    LoopNotAllowed,
    InvalidParameters,
  };

  EvalError(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Concrete-syntax failure with source position (1-based).
class SyntaxError : public std::runtime_error {
public:
  SyntaxError(int line, int column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", col " +
                           std::to_string(column) + ": " + message),
        line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

} // namespace pgcl

#endif
