#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trgnss {

enum class ErrorCode {
  NearSingular,
  DegenerateGeometry,
  ElevationTooLow,
  InsufficientSatellites,
  NoConvergence,
  SingularGeometry,
  MissingSatellite,
  NotPositiveDefinite,
  WindowExceeded,
  EmptyInput,
  MissingVelocity,
  SingularNormalEquations,
  InvalidWaypoints,
  MalformedHeader,
  MalformedEpoch,
  IoFailure,
  LengthMismatch,
  InvalidConfig,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace trgnss
