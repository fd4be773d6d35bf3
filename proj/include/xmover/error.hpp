#pragma once

#include <stdexcept>
#include <string>

namespace xmover {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed on-disk input. Carries the path and, when known, the 1-based line.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        path_(path),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

// Caller violated a precondition (dimension mismatch, bad weights, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A file could not be opened for reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace xmover
