#pragma once

#include <stdexcept>
#include <string>

namespace gnssguard {

enum class Errc {
  MissingColumn,
  EmptyChannel,
  NoOverlap,
  TooShort,
  DimensionMismatch,
  Diverged,
  EmptyDataset,
  NegativeInput,
  EmptySeries,
  InsufficientTemplates,
  WindowTooShort,
  InvalidRoute,
  SpecMismatch,
  VehicleNotMoving,
  VehicleNotStopped,
  InvalidInput,
  InvalidConfig,
  Io,
  Parse,
  Invariant,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace gnssguard
