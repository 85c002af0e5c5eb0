#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace radar {

enum class ErrorKind {
  Validation,
  DimensionMismatch,
  NonFinite,
  LookupMiss,
  RemoteUnavailable,
  Parse,
  Io,
  Numerical,
  UnknownConfiguration,
  EmptyPool,
  MissingEmbedding,
  MissingTokenData,
  DegenerateMatrix,
  EmptyResponses,
  ExhaustedCandidates,
  ThresholdUnreachable,
  MissingGroundTruth,
  EmptyCurve,
  NoSnapshot,
  MalformedRequest,
};

/// Stable kebab-case name used in machine-readable error records.
std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so that front ends
/// (CLI exit codes, HTTP statuses) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace radar
