#pragma once

#include <stdexcept>
#include <string>

namespace omnibench {

/// Failure classes surfaced by the harness. The C API and the CLI exit codes
/// are derived from these, so every thrown Error carries exactly one.
enum class ErrorKind {
  Internal,
  Config,
  Ingestion,
  Provider,
  Argument,
  Io,
  Protocol,
  DegenerateMeasurement,
  BadMagic,
  VersionMismatch,
  Truncated,
  Checksum,
  Format,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Provider failures additionally record whether a retry may succeed and the
/// HTTP status (0 for transport-level failures).
class ProviderError : public Error {
 public:
  ProviderError(const std::string& message, bool retryable, int http_status = 0)
      : Error(ErrorKind::Provider, message),
        retryable_(retryable),
        http_status_(http_status) {}

  bool retryable() const noexcept { return retryable_; }
  int http_status() const noexcept { return http_status_; }

 private:
  bool retryable_;
  int http_status_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace omnibench
