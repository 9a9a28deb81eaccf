#pragma once

#include <optional>
#include <span>

#include "gnssguard/trajectory.hpp"

namespace gnssguard {

struct MotionConfig {
  double standstill_speed_mps = 0.05;
  double window_s = 1.0;
  // Defaults to the shift-prediction error threshold when unset.
  std::optional<double> gnss_motion_floor_m;
  // Stride between consecutive evaluation windows in the detection stream.
  double hop_s = 0.5;

  void validate() const;
  double motion_floor(double fallback_threshold) const noexcept {
    return gnss_motion_floor_m.value_or(fallback_threshold);
  }
};

enum class MotionAlarmKind {
  GhostMotion,  // wheels at rest, GNSS moving (stop attack)
  FrozenGnss,   // wheels turning, GNSS frozen (overshoot attack)
};

const char* to_string(MotionAlarmKind kind) noexcept;

struct MotionAlarm {
  MotionAlarmKind kind;
};

/// True iff every sample (ft/s) converted to m/s is below the standstill
/// threshold. `speed_window` must span at least cfg.window_s.
bool detect_standstill(const TimeSeries& speed_window, const MotionConfig& cfg);

/// Sum of consecutive haversine shifts over the window.
double gnss_displacement(const Trajectory& window);

/// Trapezoidal integral of wheel speed over the window, meters.
double speed_integral(const Trajectory& window);

std::optional<MotionAlarm> check_motion_consistency(bool standstill, double gnss_disp, double speed_integral_m,
                                                    double motion_floor_m);

}  // namespace gnssguard
