#include "gnssguard/error.hpp"

namespace gnssguard {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::EmptyChannel: return "EmptyChannel";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::TooShort: return "TooShort";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::Diverged: return "Diverged";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::NegativeInput: return "NegativeInput";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::InsufficientTemplates: return "InsufficientTemplates";
    case Errc::WindowTooShort: return "WindowTooShort";
    case Errc::InvalidRoute: return "InvalidRoute";
    case Errc::SpecMismatch: return "SpecMismatch";
    case Errc::VehicleNotMoving: return "VehicleNotMoving";
    case Errc::VehicleNotStopped: return "VehicleNotStopped";
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
    case Errc::Invariant: return "Invariant";
  }
  return "Unknown";
}

}  // namespace gnssguard
