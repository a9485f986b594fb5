#pragma once

#include <stdexcept>
#include <string>

namespace phbhm {

enum class ErrorCode {
  InvalidInput = 1,
  NotConverged,
  InfeasibleSector,
  EmptySector,
  TrapDestabilized,
  UndefinedGap,
  DivisionGuard,
  NotDecaying,
  InvalidRegime,
  Refused,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure in the core library is reported as an Error. `value` carries
// a numeric diagnostic where one exists (last gradient norm, residual, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, double value = 0.0)
      : std::runtime_error(what), code_(code), value_(value) {}

  ErrorCode code() const noexcept { return code_; }
  double value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  double value_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what, double value = 0.0) {
  throw Error(code, what, value);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidInput, what);
}

}  // namespace phbhm
