#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fd4qc {

/// Failure categories surfaced by every module. The CLI maps these onto exit codes.
enum class Errc {
  MalformedRow,
  BadNumber,
  BadTimestamp,
  BadLabel,
  NoPositives,
  DegenerateClass,
  BadAlpha,
  SchemaMismatch,
  OutOfOrder,
  DimensionMismatch,
  SingleClass,
  NotSymmetric,
  NonFinite,
  IndexOutOfRange,
  WidthMismatch,
  UnsupportedGate,
  LengthMismatch,
  EmptyMatrix,
  UnknownModel,
  NoFallbackConfigured,
  BadArtifact,
  BadConfig,
  BadRequest,
  Io,
};

inline constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::BadNumber: return "BadNumber";
    case Errc::BadTimestamp: return "BadTimestamp";
    case Errc::BadLabel: return "BadLabel";
    case Errc::NoPositives: return "NoPositives";
    case Errc::DegenerateClass: return "DegenerateClass";
    case Errc::BadAlpha: return "BadAlpha";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::OutOfOrder: return "OutOfOrder";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingleClass: return "SingleClass";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NonFinite: return "NonFinite";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::WidthMismatch: return "WidthMismatch";
    case Errc::UnsupportedGate: return "UnsupportedGate";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::UnknownModel: return "UnknownModel";
    case Errc::NoFallbackConfigured: return "NoFallbackConfigured";
    case Errc::BadArtifact: return "BadArtifact";
    case Errc::BadConfig: return "BadConfig";
    case Errc::BadRequest: return "BadRequest";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

/// Thrown by row parsing; carries the 1-based line number when known.
class RowError : public Error {
 public:
  RowError(Errc code, const std::string& what, std::size_t line = 0)
      : Error(code, line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace fd4qc
