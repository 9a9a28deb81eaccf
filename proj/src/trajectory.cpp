#include "gnssguard/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "gnssguard/error.hpp"

namespace gnssguard {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      cells.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

struct ChannelColumns {
  ChannelId id;
  std::vector<std::size_t> columns;
};

void sort_and_dedupe(RawChannel& ch) {
  std::stable_sort(ch.samples.begin(), ch.samples.end(),
                   [](const ChannelSample& a, const ChannelSample& b) { return a.t < b.t; });
  const auto last = std::unique(ch.samples.begin(), ch.samples.end(),
                                [](const ChannelSample& a, const ChannelSample& b) { return a.t == b.t; });
  ch.skipped_rows += static_cast<std::size_t>(ch.samples.end() - last);
  ch.samples.erase(last, ch.samples.end());
}

// Interpolates a single-valued raw channel at t, which must lie in its span.
double channel_value_at(const RawChannel& ch, double t) {
  const auto& s = ch.samples;
  auto it = std::upper_bound(s.begin(), s.end(), t,
                             [](double x, const ChannelSample& c) { return x < c.t; });
  if (it == s.begin()) return s.front().values[0];
  const auto k = static_cast<std::size_t>(it - s.begin()) - 1;
  if (s[k].t == t || k + 1 == s.size()) return s[k].values[0];
  const double frac = (t - s[k].t) / (s[k + 1].t - s[k].t);
  return s[k].values[0] + (s[k + 1].values[0] - s[k].values[0]) * frac;
}

double estimate_rate(const std::vector<SyncedRecord>& records) {
  if (records.size() < 2) return 120.0;
  std::vector<double> dts;
  dts.reserve(records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) dts.push_back(records[i].t - records[i - 1].t);
  auto mid = dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2);
  std::nth_element(dts.begin(), mid, dts.end());
  const double rate = 1.0 / *mid;
  const double rounded = std::round(rate);
  return std::abs(rate - rounded) <= 1e-3 * rounded ? rounded : rate;
}

}  // namespace

const char* to_string(ChannelId id) noexcept {
  switch (id) {
    case ChannelId::GnssFix: return "GnssFix";
    case ChannelId::AcceleratorPct: return "AcceleratorPct";
    case ChannelId::SteeringAngleDeg: return "SteeringAngleDeg";
    case ChannelId::WheelSpeed: return "WheelSpeed";
  }
  return "Unknown";
}

bool Trajectory::gap_before(std::size_t i) const noexcept {
  if (i == 0 || i >= records.size()) return false;
  return records[i].t - records[i - 1].t > 2.0 * nominal_period();
}

GeoPoint GeoPoint::from_degrees(double lat_deg, double lon_deg) noexcept {
  return {lat_deg * kDegToRad, lon_deg * kDegToRad};
}
double GeoPoint::lat_deg() const noexcept { return lat_rad / kDegToRad; }
double GeoPoint::lon_deg() const noexcept { return lon_rad / kDegToRad; }

double FeatureRange::normalize(double x) const noexcept {
  if (!(max > min)) return 0.0;
  return std::clamp((x - min) / (max - min), 0.0, 1.0);
}

double FeatureRange::denormalize(double x) const noexcept { return min + x * (max - min); }

// ---------------------------------------------------------------------------

std::vector<RawChannel> parse_trajectory_csv(std::istream& source, const CsvSchema& schema) {
  std::string line;
  if (!std::getline(source, line)) throw Error(Errc::Parse, "CSV source has no header line");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_csv_line(line);

  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), std::string_view(name));
    if (it == header.end()) throw Error(Errc::MissingColumn, "column '" + name + "' not in header");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t t_col = column_of(schema.t);
  std::vector<ChannelColumns> configured;
  if (!schema.lat.empty() || !schema.lon.empty())
    configured.push_back({ChannelId::GnssFix, {column_of(schema.lat), column_of(schema.lon)}});
  if (!schema.accel_pct.empty()) configured.push_back({ChannelId::AcceleratorPct, {column_of(schema.accel_pct)}});
  if (!schema.steer_deg.empty()) configured.push_back({ChannelId::SteeringAngleDeg, {column_of(schema.steer_deg)}});
  if (!schema.speed.empty()) configured.push_back({ChannelId::WheelSpeed, {column_of(schema.speed)}});

  std::vector<RawChannel> channels(configured.size());
  for (std::size_t c = 0; c < configured.size(); ++c) channels[c].id = configured[c].id;

  while (std::getline(source, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const auto cell = [&](std::size_t col) -> std::optional<double> {
      return col < cells.size() ? parse_number(cells[col]) : std::nullopt;
    };
    const auto t = cell(t_col);
    for (std::size_t c = 0; c < configured.size(); ++c) {
      auto& ch = channels[c];
      if (!t) {
        ++ch.skipped_rows;
        continue;
      }
      ChannelSample sample{*t, {}};
      bool ok = true;
      for (std::size_t k = 0; k < configured[c].columns.size(); ++k) {
        const auto v = cell(configured[c].columns[k]);
        if (!v) {
          ok = false;
          break;
        }
        sample.values[k] = *v;
      }
      if (ok && ch.id == ChannelId::GnssFix)
        ok = std::abs(sample.values[0]) <= 90.0 && std::abs(sample.values[1]) <= 180.0;
      if (ok && ch.id == ChannelId::WheelSpeed) ok = sample.values[0] >= 0.0;
      if (ok)
        ch.samples.push_back(sample);
      else
        ++ch.skipped_rows;
    }
  }

  for (auto& ch : channels) {
    sort_and_dedupe(ch);
    if (ch.samples.empty())
      throw Error(Errc::EmptyChannel, std::string("channel ") + to_string(ch.id) + " has no valid rows");
  }
  return channels;
}

Trajectory synchronize(std::span<const RawChannel> channels, const RawChannel& reference,
                       double nominal_rate_hz) {
  if (reference.id != ChannelId::GnssFix) throw Error(Errc::InvalidInput, "reference must be the GnssFix channel");
  if (reference.samples.empty()) throw Error(Errc::EmptyChannel, "reference channel is empty");
  for (std::size_t i = 1; i < reference.samples.size(); ++i)
    if (!(reference.samples[i].t > reference.samples[i - 1].t))
      throw Error(Errc::InvalidInput, "reference timestamps must be strictly increasing");

  double lo = reference.samples.front().t;
  double hi = reference.samples.back().t;
  std::array<const RawChannel*, 4> by_id{};
  for (const auto& ch : channels) {
    if (ch.id == ChannelId::GnssFix) continue;
    if (ch.samples.empty()) throw Error(Errc::EmptyChannel, std::string("channel ") + to_string(ch.id) + " is empty");
    by_id[static_cast<std::size_t>(ch.id)] = &ch;
    lo = std::max(lo, ch.samples.front().t);
    hi = std::min(hi, ch.samples.back().t);
  }
  if (lo > hi) throw Error(Errc::NoOverlap, "channel time spans do not intersect the reference span");

  Trajectory traj;
  traj.nominal_rate_hz = nominal_rate_hz;
  std::string missing;
  for (ChannelId id : {ChannelId::AcceleratorPct, ChannelId::SteeringAngleDeg, ChannelId::WheelSpeed})
    if (!by_id[static_cast<std::size_t>(id)]) missing += std::string(missing.empty() ? "" : ",") + to_string(id);
  if (!missing.empty()) traj.meta["missing_channels"] = missing;

  const auto value = [&](ChannelId id, double t) {
    const RawChannel* ch = by_id[static_cast<std::size_t>(id)];
    return ch ? channel_value_at(*ch, t) : 0.0;
  };
  for (const auto& fix : reference.samples) {
    if (fix.t < lo || fix.t > hi) continue;
    traj.records.push_back({fix.t, fix.values[0], fix.values[1], value(ChannelId::AcceleratorPct, fix.t),
                            value(ChannelId::SteeringAngleDeg, fix.t), value(ChannelId::WheelSpeed, fix.t)});
  }
  if (traj.records.empty()) throw Error(Errc::NoOverlap, "no reference timestamp lies within every channel span");
  return traj;
}

Trajectory synchronize(std::span<const RawChannel> channels, double nominal_rate_hz) {
  const auto it = std::find_if(channels.begin(), channels.end(),
                               [](const RawChannel& c) { return c.id == ChannelId::GnssFix; });
  if (it == channels.end()) throw Error(Errc::InvalidInput, "no GnssFix channel to use as reference");
  return synchronize(channels, *it, nominal_rate_hz);
}

// ---------------------------------------------------------------------------

double haversine_distance(const GeoPoint& p1, const GeoPoint& p2) noexcept {
  const double s_lat = std::sin((p2.lat_rad - p1.lat_rad) / 2.0);
  const double s_lon = std::sin((p2.lon_rad - p1.lon_rad) / 2.0);
  const double h = s_lat * s_lat + std::cos(p1.lat_rad) * std::cos(p2.lat_rad) * s_lon * s_lon;
  return 2.0 * kEarthRadiusM * std::asin(std::sqrt(std::min(1.0, h)));
}

GeoPoint destination_point(const GeoPoint& origin, double bearing_rad, double distance_m) noexcept {
  const double delta = distance_m / kEarthRadiusM;
  const double sin_lat1 = std::sin(origin.lat_rad);
  const double cos_lat1 = std::cos(origin.lat_rad);
  const double sin_lat2 = std::clamp(sin_lat1 * std::cos(delta) + cos_lat1 * std::sin(delta) * std::cos(bearing_rad), -1.0, 1.0);
  const double lat2 = std::asin(sin_lat2);
  const double lon2 = origin.lon_rad + std::atan2(std::sin(bearing_rad) * std::sin(delta) * cos_lat1,
                                                  std::cos(delta) - sin_lat1 * sin_lat2);
  return {lat2, std::remainder(lon2, 2.0 * std::numbers::pi)};
}

double initial_bearing(const GeoPoint& from, const GeoPoint& to) noexcept {
  const double dlon = to.lon_rad - from.lon_rad;
  const double y = std::sin(dlon) * std::cos(to.lat_rad);
  const double x = std::cos(from.lat_rad) * std::sin(to.lat_rad) -
                   std::sin(from.lat_rad) * std::cos(to.lat_rad) * std::cos(dlon);
  return std::atan2(y, x);
}

std::vector<double> compute_location_shifts(const Trajectory& traj) {
  if (traj.size() < 2) throw Error(Errc::TooShort, "location shifts need at least 2 records");
  std::vector<double> shifts(traj.size() - 1);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i)
    shifts[i] = haversine_distance(geo_point(traj.records[i]), geo_point(traj.records[i + 1]));
  return shifts;
}

// ---------------------------------------------------------------------------

NormalizationParams fit_normalization(const FeatureSeries& features) {
  NormalizationParams params;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& s = features.series[f];
    if (s.empty()) throw Error(Errc::EmptyDataset, "cannot fit normalization on an empty feature series");
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    params.ranges[f] = {*mn, *mx};
  }
  return params;
}

FeatureVector apply_normalization(const NormalizationParams& params, const FeatureVector& raw) noexcept {
  FeatureVector out{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = params.ranges[f].normalize(raw[f]);
  return out;
}

FeatureVector denormalize(const NormalizationParams& params, const FeatureVector& normalized) noexcept {
  FeatureVector out{};
  for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = params.ranges[f].denormalize(normalized[f]);
  return out;
}

double interpolate(const TimeSeries& series, double t) {
  if (series.empty()) throw Error(Errc::EmptySeries, "interpolate on empty series");
  const auto& ts = series.t;
  if (t <= ts.front()) return series.v.front();
  if (t >= ts.back()) return series.v.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin()) - 1;
  if (ts[k] == t) return series.v[k];
  const double frac = (t - ts[k]) / (ts[k + 1] - ts[k]);
  return series.v[k] + (series.v[k + 1] - series.v[k]) * frac;
}

TimeSeries resample(const TimeSeries& series, double target_hz) {
  if (series.size() < 2) throw Error(Errc::TooShort, "resample needs at least 2 samples");
  if (!(target_hz > 0.0)) throw Error(Errc::InvalidInput, "target_hz must be positive");
  const double t0 = series.t.front();
  const double span = series.t.back() - t0;
  const auto n = static_cast<std::size_t>(std::floor(span * target_hz + 1e-9)) + 1;
  TimeSeries out;
  out.t.reserve(n);
  out.v.reserve(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) / target_hz;
    while (k + 2 < series.size() && series.t[k + 1] <= t) ++k;
    double v;
    if (series.t[k] == t)
      v = series.v[k];
    else if (series.t[k + 1] <= t)
      v = series.v[k + 1];
    else
      v = series.v[k] + (series.v[k + 1] - series.v[k]) * ((t - series.t[k]) / (series.t[k + 1] - series.t[k]));
    out.t.push_back(t);
    out.v.push_back(v);
  }
  return out;
}

TimeSeries steering_series(const Trajectory& traj) {
  TimeSeries s;
  s.t.reserve(traj.size());
  s.v.reserve(traj.size());
  for (const auto& r : traj.records) {
    s.t.push_back(r.t);
    s.v.push_back(r.steer_deg);
  }
  return s;
}

TimeSeries speed_series(const Trajectory& traj) {
  TimeSeries s;
  s.t.reserve(traj.size());
  s.v.reserve(traj.size());
  for (const auto& r : traj.records) {
    s.t.push_back(r.t);
    s.v.push_back(r.speed);
  }
  return s;
}

Trajectory slice(const Trajectory& traj, double t0, double t1) {
  Trajectory out;
  out.nominal_rate_hz = traj.nominal_rate_hz;
  out.meta = traj.meta;
  const auto by_t = [](const SyncedRecord& r, double t) { return r.t < t; };
  auto first = std::lower_bound(traj.records.begin(), traj.records.end(), t0, by_t);
  for (auto it = first; it != traj.records.end() && it->t <= t1; ++it) out.records.push_back(*it);
  return out;
}

// ---------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  (void)ec;
  return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "ts,lat,lon,accel_pct,steer_deg,speed\n";
  for (const auto& r : traj.records) {
    out << format_double(r.t) << ',' << format_double(r.lat) << ',' << format_double(r.lon) << ','
        << format_double(r.accel_pct) << ',' << format_double(r.steer_deg) << ',' << format_double(r.speed)
        << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  write_trajectory_csv(out, traj);
  if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
}

Trajectory read_trajectory_csv(std::istream& in) {
  const auto channels = parse_trajectory_csv(in, CsvSchema{});
  auto traj = synchronize(channels, 120.0);
  traj.nominal_rate_hz = estimate_rate(traj.records);
  return traj;
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  auto traj = read_trajectory_csv(in);
  traj.meta["source"] = path;
  return traj;
}

}  // namespace gnssguard
