#include "gnssguard/motion_monitor.hpp"

#include <algorithm>

#include "gnssguard/error.hpp"

namespace gnssguard {

namespace {
// Window spans are compared with a small slack so a 1 s window sampled at
// 120 Hz is not rejected over floating-point timestamp jitter.
constexpr double kSpanSlack = 1e-6;
}  // namespace

void MotionConfig::validate() const {
  if (!(standstill_speed_mps > 0.0) || !(window_s > 0.0) || !(hop_s > 0.0))
    throw Error(Errc::InvalidConfig, "motion thresholds must be positive");
  if (gnss_motion_floor_m && !(*gnss_motion_floor_m > 0.0))
    throw Error(Errc::InvalidConfig, "gnss_motion_floor_m must be positive");
}

const char* to_string(MotionAlarmKind kind) noexcept {
  return kind == MotionAlarmKind::GhostMotion ? "GhostMotion" : "FrozenGnss";
}

bool detect_standstill(const TimeSeries& speed_window, const MotionConfig& cfg) {
  if (speed_window.empty() || speed_window.t.back() - speed_window.t.front() < cfg.window_s - kSpanSlack)
    throw Error(Errc::WindowTooShort, "speed window shorter than the configured window length");
  return std::all_of(speed_window.v.begin(), speed_window.v.end(),
                     [&](double ft_s) { return ft_s * kFeetToMeters < cfg.standstill_speed_mps; });
}

double gnss_displacement(const Trajectory& window) {
  if (window.size() < 2) throw Error(Errc::TooShort, "displacement needs at least 2 fixes");
  double total = 0.0;
  for (std::size_t i = 1; i < window.size(); ++i)
    total += haversine_distance(geo_point(window.records[i - 1]), geo_point(window.records[i]));
  return total;
}

double speed_integral(const Trajectory& window) {
  double total = 0.0;
  for (std::size_t i = 1; i < window.size(); ++i) {
    const auto& a = window.records[i - 1];
    const auto& b = window.records[i];
    total += 0.5 * (a.speed + b.speed) * kFeetToMeters * (b.t - a.t);
  }
  return total;
}

std::optional<MotionAlarm> check_motion_consistency(bool standstill, double gnss_disp, double speed_integral_m,
                                                    double motion_floor_m) {
  if (standstill && gnss_disp > motion_floor_m) return MotionAlarm{MotionAlarmKind::GhostMotion};
  if (!standstill && gnss_disp < motion_floor_m && speed_integral_m > 2.0 * motion_floor_m)
    return MotionAlarm{MotionAlarmKind::FrozenGnss};
  return std::nullopt;
}

}  // namespace gnssguard
