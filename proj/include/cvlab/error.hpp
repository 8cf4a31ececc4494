#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by parse_expression. `offset` is a byte offset into the source.
class ParseError : public Error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, Arity };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : Error(what + " at offset " + std::to_string(offset)),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Evaluation outside the domain of a generator (ln of a nonpositive value,
/// division by zero, extrapolation past the last sample, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what + " (achieved tolerance " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

/// Invalid model construction input or a query outside a model's range.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Family parameters violating their admissibility constraints.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvlab
