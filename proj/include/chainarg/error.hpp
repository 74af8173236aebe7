#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chainarg {

// Base of every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON or statement syntax). Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class BindingError : public Error {
 public:
  using Error::Error;
};

class GroundingError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  VersionError(const std::string& what, int found) : Error(what), found_(found) {}
  int found() const noexcept { return found_; }

 private:
  int found_;
};

class SizeGuardError : public Error {
 public:
  using Error::Error;
};

}  // namespace chainarg
