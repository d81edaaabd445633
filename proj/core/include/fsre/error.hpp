#pragma once

#include <stdexcept>
#include <string>

namespace fsre {

// Failure categories. The CLI maps each one onto a distinct exit code.
enum class ErrorKind {
  config,   // bad or missing configuration, unreadable inputs
  backend,  // completion backend failed (retries exhausted, auth, script exhausted)
  data,     // dataset / schema / instance validation failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class BackendError : public Error {
 public:
  BackendError(const std::string& what, int status = 0, bool retryable = false)
      : Error(ErrorKind::backend, what), status_(status), retryable_(retryable) {}

  // HTTP status of the last attempt, 0 for transport failures and mocks.
  int status() const noexcept { return status_; }
  bool retryable() const noexcept { return retryable_; }

 private:
  int status_;
  bool retryable_;
};

}  // namespace fsre
