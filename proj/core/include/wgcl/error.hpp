#pragma once

#include <stdexcept>
#include <string>

namespace wgcl {

// Failure categories surfaced to the command line as distinct exit codes.
enum class ErrorKind { config, data, numeric };

// Every recoverable failure carries the module that raised it so the CLI can
// print "[module] message" without guessing.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

private:
  ErrorKind kind_;
  std::string module_;
};

class ConfigError : public Error {
public:
  ConfigError(std::string module, const std::string& message)
      : Error(ErrorKind::config, std::move(module), message) {}
};

class DataError : public Error {
public:
  DataError(std::string module, const std::string& message)
      : Error(ErrorKind::data, std::move(module), message) {}
};

class NumericError : public Error {
public:
  NumericError(std::string module, const std::string& message)
      : Error(ErrorKind::numeric, std::move(module), message) {}
};

constexpr int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return 2;
    case ErrorKind::data: return 3;
    case ErrorKind::numeric: return 4;
  }
  return 1;
}

}  // namespace wgcl
