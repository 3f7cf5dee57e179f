#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace augclip {

enum class ErrorCode {
  ZeroVector,
  DimensionMismatch,
  NonFinite,
  EmptySet,
  NonpositiveWeightSum,
  ParseError,
  DuplicateId,
  MissingId,
  TransportError,
  EncoderError,
  EmptyGeneration,
  CacheCorruption,
  DegenerateData,
  SingularCovariance,
  DegenerateHyperplane,
  ZeroIdeal,
  DegenerateDirection,
  ConstantScores,
  SchemaError,
  DanglingReference,
  NoEligibleCases,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;
std::optional<ErrorCode> parse_error_code(std::string_view s) noexcept;

// Every failure raised by the library carries a code so callers (the harness
// in particular) can record it per metric instead of aborting a run.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace augclip
