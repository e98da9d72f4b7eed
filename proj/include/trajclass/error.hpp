#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace trajclass {

enum class ErrorKind {
  Parse,
  Ordering,
  Size,
  Geometry,
  Segmentation,
  Argument,
  InsufficientPoints,
  DivisionByZero,
  Feature,
  Shape,
  Filter,
  Parameter,
  Usage,
  Training,
  Convergence,
  Label,
  DegenerateSample,
  SampleSize,
  Stratification,
  Split,
  Lookup,
  Validation,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(long iterations, const std::string& message)
      : Error(ErrorKind::Convergence, message), iterations_(iterations) {}

  [[nodiscard]] long iterations() const noexcept { return iterations_; }

 private:
  long iterations_;
};

// Config validation failure located by a JSON pointer.
class ValidationError : public Error {
 public:
  ValidationError(std::string pointer, const std::string& message)
      : Error(ErrorKind::Validation, pointer + ": " + message), pointer_(std::move(pointer)) {}

  [[nodiscard]] const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace trajclass
