#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mgca {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input data (files, weights, names) violates a documented invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Text that does not follow the constraint/objective grammar.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::string text, std::size_t position)
      : Error(message + " at column " + std::to_string(position + 1)),
        text_(std::move(text)), position_(position) {}

  const std::string& text() const noexcept { return text_; }
  std::size_t position() const noexcept { return position_; }

  /// The offending text followed by a caret line pointing at the error.
  std::string caret() const {
    return text_ + "\n" + std::string(position_, ' ') + "^";
  }

private:
  std::string text_;
  std::size_t position_;
};

/// A model or constraint set admits no feasible point.
class InfeasibleError : public Error {
public:
  InfeasibleError(const std::string& message, std::string label)
      : Error(message), label_(std::move(label)) {}

  /// Label of the most violated constraint, empty when unknown.
  const std::string& label() const noexcept { return label_; }

private:
  std::string label_;
};

}  // namespace mgca
