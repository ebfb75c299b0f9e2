#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace nkv {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A NaN or infinity reached a constructor that only accepts finite data.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class OperatorEvaluationError : public Error {
 public:
  using Error::Error;
};

/// I - A'(x) (or P'(x) for root problems) could not be inverted.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class InnerDivergenceError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class NoValidMajorantError : public Error {
 public:
  using Error::Error;
};

/// Problem-file or argument validation failure; `where` is a JSON path or
/// a "line:column" location.
class ValidationError : public Error {
 public:
  ValidationError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error("position " + std::to_string(position) + ": " + what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownVariableError : public ParseError {
 public:
  UnknownVariableError(std::size_t position, std::string name)
      : ParseError(position, "unknown variable '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation of an expression left the real domain (log of a nonpositive
/// number, division by zero, ...). `node` is the printed offending subtree.
class DomainError : public Error {
 public:
  DomainError(std::string node, const std::string& what)
      : Error(what + " in '" + node + "'"), node_(std::move(node)) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// A failure inside run_outer, tagged with the index n of the iterate that
/// was being computed.
class StepError : public Error {
 public:
  StepError(std::size_t step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace nkv
