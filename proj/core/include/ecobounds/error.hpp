#pragma once

#include <stdexcept>
#include <string>

namespace ecobounds {

enum class ErrorKind { config, data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorKind::config, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(ErrorKind::data, message) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message, double residual = 0.0)
      : Error(ErrorKind::numerical, message), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

const char* to_string(ErrorKind kind);

// Process exit code for an error category: 2 config, 3 data, 4 numerical.
int exit_code(ErrorKind kind);

}  // namespace ecobounds
