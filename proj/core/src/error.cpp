#include "radar/error.hpp"

namespace radar {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::LookupMiss: return "lookup-miss";
    case ErrorKind::RemoteUnavailable: return "remote-unavailable";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::Numerical: return "numerical-failure";
    case ErrorKind::UnknownConfiguration: return "unknown-configuration";
    case ErrorKind::EmptyPool: return "empty-pool";
    case ErrorKind::MissingEmbedding: return "missing-embedding";
    case ErrorKind::MissingTokenData: return "missing-token-data";
    case ErrorKind::DegenerateMatrix: return "degenerate-matrix";
    case ErrorKind::EmptyResponses: return "empty-responses";
    case ErrorKind::ExhaustedCandidates: return "exhausted-candidates";
    case ErrorKind::ThresholdUnreachable: return "threshold-unreachable";
    case ErrorKind::MissingGroundTruth: return "missing-ground-truth";
    case ErrorKind::EmptyCurve: return "empty-curve";
    case ErrorKind::NoSnapshot: return "no-snapshot";
    case ErrorKind::MalformedRequest: return "malformed-request";
  }
  return "unknown";
}

}  // namespace radar
