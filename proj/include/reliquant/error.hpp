#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reliquant {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition or invariant
/// (bad argument ranges, invalid trees, domains, profiles, specs).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed document text. Carries a 1-based line and column.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : ValidationError("line " + std::to_string(line) + ", column " +
                        std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Minimal cut set expansion exceeded its configured cap.
class CutSetLimitError : public Error {
 public:
  using Error::Error;
};

/// Inclusion-exclusion would need more terms than allowed.
class TermLimitError : public Error {
 public:
  using Error::Error;
};

/// Importance ratio with a zero denominator.
class UndefinedImportanceError : public Error {
 public:
  using Error::Error;
};

/// A filter predicate threw while enumerating a domain.
class PredicateError : public Error {
 public:
  using Error::Error;
};

/// Subject could not be started, or broke the line protocol.
class SubjectError : public Error {
 public:
  using Error::Error;
};

/// A result carries neither a statistical claim nor a certificate.
class NoClaimError : public Error {
 public:
  using Error::Error;
};

}  // namespace reliquant
