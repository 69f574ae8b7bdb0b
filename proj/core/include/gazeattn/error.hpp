#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gazeattn {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented contract. The CLI maps these to exit 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ValueError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed file content; `line()` is 1-based, 0 when not applicable.
class ParseError : public ValidationError {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what)
      : ValidationError(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// A metric could not be evaluated for one image (empty positives/negatives).
class ScoringError : public ValidationError {
 public:
  ScoringError(std::string image_id, const std::string& what)
      : ValidationError("image '" + image_id + "': " + what), image_id_(std::move(image_id)) {}

  const std::string& image_id() const noexcept { return image_id_; }

 private:
  std::string image_id_;
};

/// Training produced a non-finite loss or parameter.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error("diverged at step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace gazeattn
