#pragma once

#include <stdexcept>
#include <string>

namespace readtask {

// Base class for every error raised by the library. `kind()` is a stable
// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class ParseError : public Error {
public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error("parse", file + ":" + std::to_string(line) + ": " + what),
        file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string file_;
  std::size_t line_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

class ParameterError : public Error {
public:
  explicit ParameterError(const std::string& what) : Error("parameter", what) {}
};

class LengthError : public Error {
public:
  explicit LengthError(const std::string& what) : Error("length", what) {}
};

class RangeError : public Error {
public:
  explicit RangeError(const std::string& what) : Error("range", what) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

class DataError : public Error {
public:
  explicit DataError(const std::string& what) : Error("data", what) {}
};

class UnsupportedError : public Error {
public:
  explicit UnsupportedError(const std::string& what) : Error("unsupported", what) {}
};

class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error("usage", what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace readtask
