#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gnssguard {

/// Earth radius used by every geodesic computation in the toolkit (meters).
inline constexpr double kEarthRadiusM = 6'378'000.0;
inline constexpr double kFeetToMeters = 0.3048;

enum class ChannelId { GnssFix, AcceleratorPct, SteeringAngleDeg, WheelSpeed };

const char* to_string(ChannelId id) noexcept;

struct ChannelSample {
  double t = 0.0;
  // GnssFix: {lat_deg, lon_deg}; single-valued channels use values[0].
  std::array<double, 2> values{};
};

struct RawChannel {
  ChannelId id = ChannelId::GnssFix;
  std::vector<ChannelSample> samples;
  std::size_t skipped_rows = 0;  // unparsable or duplicate-timestamp rows
};

/// Maps CSV header names onto channel fields. An empty name leaves the
/// channel unconfigured.
struct CsvSchema {
  std::string t = "ts";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string accel_pct = "accel_pct";
  std::string steer_deg = "steer_deg";
  std::string speed = "speed";
};

struct SyncedRecord {
  double t = 0.0;          // seconds, UNIX epoch
  double lat = 0.0;        // degrees
  double lon = 0.0;        // degrees
  double accel_pct = 0.0;  // percent
  double steer_deg = 0.0;  // steering-wheel degrees, positive = right
  double speed = 0.0;      // feet/second
};

struct Trajectory {
  std::vector<SyncedRecord> records;
  double nominal_rate_hz = 120.0;
  std::map<std::string, std::string> meta;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  double nominal_period() const noexcept { return 1.0 / nominal_rate_hz; }
  double start_t() const { return records.front().t; }
  double end_t() const { return records.back().t; }

  /// True when the gap between record i-1 and i exceeds twice the nominal
  /// period. Record 0 is never a boundary.
  bool gap_before(std::size_t i) const noexcept;
};

struct GeoPoint {
  double lat_rad = 0.0;
  double lon_rad = 0.0;

  static GeoPoint from_degrees(double lat_deg, double lon_deg) noexcept;
  double lat_deg() const noexcept;
  double lon_deg() const noexcept;
};

inline GeoPoint geo_point(const SyncedRecord& r) noexcept {
  return GeoPoint::from_degrees(r.lat, r.lon);
}

struct TimeSeries {
  std::vector<double> t;
  std::vector<double> v;

  std::size_t size() const noexcept { return t.size(); }
  bool empty() const noexcept { return t.empty(); }
};

// Feature layout shared by normalization and the shift predictor.
enum Feature : std::size_t { kShift = 0, kAccel = 1, kSteer = 2, kSpeed = 3 };
inline constexpr std::size_t kFeatureCount = 4;
using FeatureVector = std::array<double, kFeatureCount>;

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;

  /// (x - min) / (max - min) clamped to [0, 1]; constant features map to 0.
  double normalize(double x) const noexcept;
  double denormalize(double x) const noexcept;
};

struct NormalizationParams {
  std::array<FeatureRange, kFeatureCount> ranges{};

  const FeatureRange& shift() const noexcept { return ranges[kShift]; }
};

struct FeatureSeries {
  std::array<std::vector<double>, kFeatureCount> series;
};

// ---------------------------------------------------------------------------
// Ingestion and synchronization

std::vector<RawChannel> parse_trajectory_csv(std::istream& source, const CsvSchema& schema = {});

/// Interpolates every non-reference channel onto the reference timestamps.
/// Reference timestamps outside any channel's span are dropped.
Trajectory synchronize(std::span<const RawChannel> channels, const RawChannel& reference,
                       double nominal_rate_hz = 120.0);

/// Convenience overload; the GnssFix entry of `channels` is the reference.
Trajectory synchronize(std::span<const RawChannel> channels, double nominal_rate_hz = 120.0);

// ---------------------------------------------------------------------------
// Geodesy

double haversine_distance(const GeoPoint& p1, const GeoPoint& p2) noexcept;

/// Point reached by travelling `distance_m` along the great circle leaving
/// `origin` at `bearing_rad` (clockwise from north).
GeoPoint destination_point(const GeoPoint& origin, double bearing_rad, double distance_m) noexcept;

/// Initial great-circle bearing from `from` to `to`, radians in (-pi, pi].
double initial_bearing(const GeoPoint& from, const GeoPoint& to) noexcept;

std::vector<double> compute_location_shifts(const Trajectory& traj);

// ---------------------------------------------------------------------------
// Features

NormalizationParams fit_normalization(const FeatureSeries& features);
FeatureVector apply_normalization(const NormalizationParams& params, const FeatureVector& raw) noexcept;
FeatureVector denormalize(const NormalizationParams& params, const FeatureVector& normalized) noexcept;

/// Linear interpolation of a strictly increasing series. Values outside the
/// span are clamped to the end samples. A query equal to a sample time
/// returns that sample verbatim.
double interpolate(const TimeSeries& series, double t);

TimeSeries resample(const TimeSeries& series, double target_hz);

TimeSeries steering_series(const Trajectory& traj);
TimeSeries speed_series(const Trajectory& traj);

/// Records whose timestamps fall in [t0, t1].
Trajectory slice(const Trajectory& traj, double t0, double t1);

// ---------------------------------------------------------------------------
// Persistence: ts,lat,lon,accel_pct,steer_deg,speed at 17 significant digits.

std::string format_double(double x);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace gnssguard
