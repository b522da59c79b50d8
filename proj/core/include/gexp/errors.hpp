#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gexp {

/// Base class for every error raised by the engines.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run was requested with parameters the engines refuse (CFL, leaf budget,
/// missing product space, ...). Maps to exit code 2 on the command line.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The engines only implement d = 1.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " at position " + std::to_string(position)),
        position_(position) {}

  [[nodiscard]] std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace gexp
