#include <cmath>

#include "doctest.h"

#include "gnssguard/error.hpp"
#include "gnssguard/motion_monitor.hpp"
#include "test_support.hpp"

using namespace gnssguard;

namespace {

TimeSeries constant_speed(double ft_s, double span_s, double hz = 120.0) {
  TimeSeries s;
  const auto n = static_cast<std::size_t>(std::lround(span_s * hz)) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    s.t.push_back(static_cast<double>(i) / hz);
    s.v.push_back(ft_s);
  }
  return s;
}

}  // namespace

TEST_CASE("standstill uses the m/s threshold on ft/s input") {
  MotionConfig cfg;
  CHECK(detect_standstill(constant_speed(0.0, 1.0), cfg));
  CHECK(detect_standstill(constant_speed(0.16, 1.0), cfg));   // 0.0488 m/s
  CHECK_FALSE(detect_standstill(constant_speed(0.17, 1.0), cfg));  // 0.0518 m/s
  auto s = constant_speed(0.0, 1.0);
  s.v[60] = 1.0;
  CHECK_FALSE(detect_standstill(s, cfg));
}

TEST_CASE("standstill needs a full window") {
  MotionConfig cfg;
  CHECK_THROWS_AS(detect_standstill(constant_speed(0.0, 0.5), cfg), Error);
  CHECK_THROWS_AS(detect_standstill(TimeSeries{}, cfg), Error);
}

TEST_CASE("gnss displacement and speed integral on a straight track") {
  const auto traj = testsupport::straight_track(121, 10.0);  // 1 s at 10 m/s
  CHECK(gnss_displacement(traj) == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(speed_integral(traj) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(gnss_displacement(testsupport::frozen_track(121, 0.0)) == 0.0);
  CHECK_THROWS_AS(gnss_displacement(testsupport::frozen_track(1, 0.0)), Error);
}

TEST_CASE("speed integral is the trapezoid rule") {
  auto traj = testsupport::frozen_track(3, 0.0, 1.0);
  traj.records[0].speed = 0.0;
  traj.records[1].speed = 10.0 / kFeetToMeters;
  traj.records[2].speed = 20.0 / kFeetToMeters;
  CHECK(speed_integral(traj) == doctest::Approx(5.0 + 15.0).epsilon(1e-12));
}

TEST_CASE("motion consistency rules") {
  const double floor = 0.1446;
  CHECK(check_motion_consistency(true, 0.5, 0.0, floor)->kind == MotionAlarmKind::GhostMotion);
  CHECK_FALSE(check_motion_consistency(true, 0.1, 0.0, floor).has_value());
  CHECK(check_motion_consistency(false, 0.0, 10.0, floor)->kind == MotionAlarmKind::FrozenGnss);
  CHECK_FALSE(check_motion_consistency(false, 10.0, 10.0, floor).has_value());
  // Creeping forward: neither signal carries enough evidence.
  CHECK_FALSE(check_motion_consistency(false, 0.05, 0.2, floor).has_value());
}

TEST_CASE("a consistent stopped or moving vehicle never alarms") {
  Rng rng(4);
  MotionConfig cfg;
  for (int rep = 0; rep < 100; ++rep) {
    const double v = rng.uniform(2.0, 30.0);
    const auto moving = testsupport::straight_track(121, v, 120.0, rng.uniform(0, 360));
    const bool still = detect_standstill(speed_series(moving), cfg);
    CHECK_FALSE(still);
    CHECK_FALSE(check_motion_consistency(still, gnss_displacement(moving), speed_integral(moving), 0.1446).has_value());
  }
  const auto parked = testsupport::frozen_track(121, 0.0);
  CHECK_FALSE(check_motion_consistency(detect_standstill(speed_series(parked), cfg), gnss_displacement(parked),
                                       speed_integral(parked), 0.1446)
                  .has_value());
}

TEST_CASE("motion config validation and floor fallback") {
  MotionConfig cfg;
  CHECK(cfg.motion_floor(0.2) == 0.2);
  cfg.gnss_motion_floor_m = 0.3;
  CHECK(cfg.motion_floor(0.2) == 0.3);
  cfg.window_s = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
