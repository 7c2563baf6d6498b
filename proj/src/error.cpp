#include "omnibench/error.hpp"

namespace omnibench {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Internal: return "internal";
    case ErrorKind::Config: return "config";
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::Provider: return "provider";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Io: return "io";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::DegenerateMeasurement: return "degenerate-measurement";
    case ErrorKind::BadMagic: return "bad-magic";
    case ErrorKind::VersionMismatch: return "version-mismatch";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::Checksum: return "checksum";
    case ErrorKind::Format: return "format";
  }
  return "unknown";
}

}  // namespace omnibench
