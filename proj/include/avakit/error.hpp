#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avakit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A row could not be tokenized or a field is not a number.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// A row parsed but violates a domain invariant (box order, label range, ...).
class ValidationError : public Error {
 public:
  ValidationError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Records that should describe the same actor box disagree.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// An operation needs at least one instance / ground-truth row.
class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is outside its documented domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace avakit
