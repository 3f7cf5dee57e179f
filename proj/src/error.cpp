#include "augclip/error.hpp"

namespace augclip {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NonpositiveWeightSum: return "NonpositiveWeightSum";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::MissingId: return "MissingId";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::EncoderError: return "EncoderError";
    case ErrorCode::EmptyGeneration: return "EmptyGeneration";
    case ErrorCode::CacheCorruption: return "CacheCorruption";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DegenerateHyperplane: return "DegenerateHyperplane";
    case ErrorCode::ZeroIdeal: return "ZeroIdeal";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::ConstantScores: return "ConstantScores";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::NoEligibleCases: return "NoEligibleCases";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::optional<ErrorCode> parse_error_code(std::string_view s) noexcept {
  for (int i = 0; i <= static_cast<int>(ErrorCode::InvalidArgument); ++i) {
    auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == s) return code;
  }
  return std::nullopt;
}

}  // namespace augclip
