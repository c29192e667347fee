#include "mcpsd/error.hpp"

namespace mcpsd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::FeasibilityExhausted: return "FeasibilityExhausted";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DelayOutOfRange: return "DelayOutOfRange";
    case ErrorCode::InvalidLength: return "InvalidLength";
    case ErrorCode::RecordTooShort: return "RecordTooShort";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace mcpsd
