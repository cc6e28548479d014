#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace corn {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DisconnectedError : public Error {
 public:
  using Error::Error;
};

class NotChoppedError : public Error {
 public:
  using Error::Error;
};

class InvalidK : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class ClusteringMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class NotBracketed : public Error {
 public:
  using Error::Error;
};

}  // namespace corn
