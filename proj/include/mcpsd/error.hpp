#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcpsd {

// Numeric values are mirrored by mcpsd_status in mcpsd.h.
enum class ErrorCode {
  InvalidArgument = 1,
  InvalidDimensions = 2,
  FeasibilityExhausted = 3,
  RankDeficient = 4,
  DelayOutOfRange = 5,
  InvalidLength = 6,
  RecordTooShort = 7,
  InstanceTooLarge = 8,
  Io = 9,
  Parse = 10,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace mcpsd
