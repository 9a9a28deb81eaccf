#include "gnssguard/attack_forge.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

#include "gnssguard/error.hpp"

namespace gnssguard {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr std::size_t kSubsteps = 4;
constexpr double kSnapEps = 1e-9;

struct SpeedZone {
  double s0, s1, v;
};

struct TurnPiece {
  double s0, main_len, counter_len, sign;
};

struct StopPoint {
  double s, dwell;
};

// Arc-length plan of a route: speed targets, curvature lobes, stops.
class RoutePlan {
 public:
  RoutePlan(const Route& route, const VehicleModel& vm) : vm_(vm) {
    const double lobe_area = 0.5 - 0.5 * vm.counter_steer_ratio * vm.counter_steer_length;
    double s = 0.0;
    for (const auto& leg : route.legs) {
      zones_.push_back({s, s + leg.length_m, leg.speed_mps});
      s += leg.length_m;
      if (leg.dwell_s > 0.0) stops_.push_back({s, leg.dwell_s});
      if (leg.turn_deg != 0.0) {
        const double theta = std::abs(leg.turn_deg) * kDeg;
        const double main_len = theta / (lobe_area * vm.max_curvature);
        const double counter_len = vm.counter_steer_length * main_len;
        turns_.push_back({s, main_len, counter_len, leg.turn_deg > 0.0 ? 1.0 : -1.0});
        zones_.push_back({s, s + main_len + counter_len, std::min(leg.speed_mps, route.turn_speed_mps)});
        s += main_len + counter_len;
      }
    }
    length_ = s;
    final_stop_ = !stops_.empty() && stops_.back().s >= length_;
  }

  double length() const noexcept { return length_; }
  bool ends_with_stop() const noexcept { return final_stop_; }
  const std::vector<StopPoint>& stops() const noexcept { return stops_; }

  double curvature(double s) const noexcept {
    for (const auto& tp : turns_) {
      const double u = s - tp.s0;
      if (u < 0.0 || u >= tp.main_len + tp.counter_len) continue;
      if (u < tp.main_len) {
        const double x = std::sin(std::numbers::pi * u / tp.main_len);
        return tp.sign * vm_.max_curvature * x * x;
      }
      const double x = std::sin(std::numbers::pi * (u - tp.main_len) / tp.counter_len);
      return -tp.sign * vm_.counter_steer_ratio * vm_.max_curvature * x * x;
    }
    return 0.0;
  }

  double target_speed(double s) const noexcept {
    for (const auto& z : zones_)
      if (s >= z.s0 && s < z.s1) return z.v;
    return zones_.back().v;
  }

  // Highest speed at `s` that still allows braking into every slower zone
  // ahead and into the next stop.
  double braking_limit(double s, std::size_t next_stop) const noexcept {
    double limit = std::numeric_limits<double>::infinity();
    for (const auto& z : zones_)
      if (z.s0 > s) limit = std::min(limit, std::sqrt(z.v * z.v + 2.0 * vm_.decel_mps2 * (z.s0 - s)));
    if (next_stop < stops_.size())
      limit = std::min(limit, std::sqrt(2.0 * vm_.decel_mps2 * std::max(0.0, stops_[next_stop].s - s)));
    return limit;
  }

 private:
  VehicleModel vm_;
  std::vector<SpeedZone> zones_;
  std::vector<TurnPiece> turns_;
  std::vector<StopPoint> stops_;
  double length_ = 0.0;
  bool final_stop_ = false;
};

// First-order Gauss-Markov process per horizontal axis.
class GaussMarkov2d {
 public:
  GaussMarkov2d(double sigma, double corr_s, double dt, bool start_at_zero, Rng& rng)
      : sigma_(sigma), rho_(corr_s > 0.0 ? std::exp(-dt / corr_s) : 0.0), rng_(rng) {
    if (!start_at_zero) {
      east_ = sigma_ * rng_.normal();
      north_ = sigma_ * rng_.normal();
    }
  }

  double east() const noexcept { return east_; }
  double north() const noexcept { return north_; }

  void advance() {
    const double drive = sigma_ * std::sqrt(1.0 - rho_ * rho_);
    east_ = rho_ * east_ + drive * rng_.normal();
    north_ = rho_ * north_ + drive * rng_.normal();
  }

 private:
  double sigma_, rho_;
  Rng& rng_;
  double east_ = 0.0, north_ = 0.0;
};

void apply_offset(SyncedRecord& rec, const GeoPoint& p, double east_m, double north_m) {
  const double lat = p.lat_rad + north_m / kEarthRadiusM;
  const double lon = p.lon_rad + east_m / (kEarthRadiusM * std::cos(p.lat_rad));
  rec.lat = lat / kDeg;
  rec.lon = lon / kDeg;
}

std::size_t first_index_at_or_after(const Trajectory& traj, double t) {
  if (traj.empty() || t < traj.start_t() || t > traj.end_t())
    throw Error(Errc::InvalidInput, "attack start_t outside the trajectory span");
  const auto it = std::lower_bound(traj.records.begin(), traj.records.end(), t,
                                   [](const SyncedRecord& r, double x) { return r.t < x; });
  return static_cast<std::size_t>(it - traj.records.begin());
}

// Course over ground at record k from the nearest fix at least `min_dist_m`
// away, looking backwards first.
double heading_at(const Trajectory& traj, std::size_t k, double min_dist_m) {
  const GeoPoint pk = geo_point(traj.records[k]);
  for (std::size_t j = k; j-- > 0;) {
    const GeoPoint pj = geo_point(traj.records[j]);
    if (haversine_distance(pj, pk) >= min_dist_m) return initial_bearing(pj, pk);
  }
  for (std::size_t j = k + 1; j < traj.size(); ++j) {
    const GeoPoint pj = geo_point(traj.records[j]);
    if (haversine_distance(pk, pj) >= min_dist_m) return initial_bearing(pk, pj);
  }
  return 0.0;
}

void require_kind(const AttackSpec& spec, AttackKind kind) {
  if (spec.kind != kind)
    throw Error(Errc::SpecMismatch, std::string("expected a ") + to_string(kind) + " spec, got " + to_string(spec.kind));
}

AttackScenario start_scenario(const Trajectory& clean, const AttackSpec& spec, std::size_t k0) {
  AttackScenario sc;
  sc.clean = clean;
  sc.spoofed = clean;
  sc.spec = spec;
  sc.ground_truth = AttackInterval{clean.records[k0].t, clean.end_t()};
  sc.spoofed.meta["attack"] = to_string(spec.kind);
  return sc;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void randomize_origin(Route& r, Rng& rng) {
  r.origin_lat_deg = 37.38 + rng.uniform(-0.02, 0.02);
  r.origin_lon_deg = -122.08 + rng.uniform(-0.02, 0.02);
  r.initial_bearing_deg = rng.uniform(0.0, 360.0);
}

double signed_turn(Rng& rng) { return rng.uniform() < 0.5 ? -90.0 : 90.0; }

double first_turn_time(const Trajectory& traj) {
  for (const auto& r : traj.records)
    if (std::abs(r.steer_deg) > 90.0) return r.t;
  return traj.end_t();
}

double first_stop_time(const Trajectory& traj) {
  for (std::size_t k = 1; k < traj.size(); ++k)
    if (traj.records[k].speed == 0.0) return traj.records[k].t;
  throw Error(Errc::Invariant, "stop route never comes to rest");
}

double json_number(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_number()) throw Error(Errc::Parse, std::string("field '") + key + "' must be a number");
  return doc.at(key).get<double>();
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// Generator

void validate_route(const Route& route) {
  if (route.legs.empty()) throw Error(Errc::InvalidRoute, "route has no legs");
  if (!(route.turn_speed_mps > 0.0)) throw Error(Errc::InvalidRoute, "turn speed must be positive");
  if (!std::isfinite(route.origin_lat_deg) || std::abs(route.origin_lat_deg) >= 89.0 ||
      !std::isfinite(route.origin_lon_deg) || !std::isfinite(route.initial_bearing_deg) ||
      !std::isfinite(route.start_time_s))
    throw Error(Errc::InvalidRoute, "route origin, bearing or start time invalid");
  for (const auto& leg : route.legs) {
    if (!(leg.length_m > 0.0) || !std::isfinite(leg.length_m))
      throw Error(Errc::InvalidRoute, "leg length must be positive");
    if (!(leg.speed_mps > 0.0) || !std::isfinite(leg.speed_mps))
      throw Error(Errc::InvalidRoute, "leg speed must be positive");
    if (!(std::abs(leg.turn_deg) <= 180.0)) throw Error(Errc::InvalidRoute, "leg turn must be within [-180, 180]");
    if (!(leg.dwell_s >= 0.0) || !std::isfinite(leg.dwell_s))
      throw Error(Errc::InvalidRoute, "leg dwell must be non-negative");
  }
}

Trajectory generate_synthetic_trajectory(const Route& route, double rate_hz, const NoiseModel& noise,
                                         std::uint64_t seed, std::size_t max_records,
                                         const VehicleModel& vehicle) {
  validate_route(route);
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(Errc::InvalidRoute, "rate_hz must be positive");
  if (!(noise.gnss_sigma_m >= 0.0) || !(noise.speed_sigma_ftps >= 0.0))
    throw Error(Errc::InvalidRoute, "noise levels must be non-negative");

  const RoutePlan plan(route, vehicle);
  const double dt = 1.0 / rate_hz;
  Rng rng(seed);
  GaussMarkov2d gnss(noise.gnss_sigma_m, noise.gnss_correlation_s, dt, false, rng);

  Trajectory traj;
  traj.nominal_rate_hz = rate_hz;
  traj.meta["source"] = "synthetic";
  traj.meta["seed"] = std::to_string(seed);

  GeoPoint p = GeoPoint::from_degrees(route.origin_lat_deg, route.origin_lon_deg);
  double heading = route.initial_bearing_deg * kDeg;
  double s = 0.0;
  std::size_t next_stop = 0;
  double v = std::min(plan.target_speed(0.0), plan.braking_limit(0.0, 0));
  double v_prev = v;
  double dwell_left = 0.0;
  bool finished = false;

  double total_time = 0.0;
  for (const auto& leg : route.legs) total_time += leg.length_m / std::min(leg.speed_mps, route.turn_speed_mps) + leg.dwell_s;
  const std::size_t hard_cap = static_cast<std::size_t>(4.0 * (total_time + 60.0) * rate_hz) + 16;

  for (std::size_t k = 0; !finished; ++k) {
    if ((max_records && k >= max_records) || k >= hard_cap) break;

    SyncedRecord rec;
    rec.t = route.start_time_s + static_cast<double>(k) * dt;
    apply_offset(rec, p, gnss.east(), gnss.north());
    rec.steer_deg = vehicle.steering_ratio * std::atan(vehicle.wheelbase_m * plan.curvature(s)) / kDeg;
    rec.accel_pct = k == 0 ? 0.0 : std::clamp(vehicle.accel_pct_per_mps2 * (v - v_prev) / dt, 0.0, 100.0);
    rec.speed = 0.0;
    if (v > 0.0) rec.speed = std::max(0.0, v / kFeetToMeters + noise.speed_sigma_ftps * rng.normal());
    traj.records.push_back(rec);

    // Advance to the next record.
    v_prev = v;
    if (dwell_left > 0.0) {
      dwell_left -= dt;
      if (dwell_left <= kSnapEps) {
        dwell_left = 0.0;
        ++next_stop;
        if (next_stop >= plan.stops().size() && plan.ends_with_stop()) finished = true;
      }
      v = 0.0;
      gnss.advance();
      continue;
    }

    double v_next = std::min({v + vehicle.accel_mps2 * dt, plan.target_speed(s), plan.braking_limit(s, next_stop)});
    v_next = std::max(0.0, v_next);
    double ds = 0.5 * (v + v_next) * dt;
    if (next_stop < plan.stops().size() && s + ds >= plan.stops()[next_stop].s - kSnapEps) {
      ds = std::max(0.0, plan.stops()[next_stop].s - s);
      v_next = 0.0;
      dwell_left = plan.stops()[next_stop].dwell;
    } else if (s + ds > plan.length()) {
      finished = true;
    }
    if (finished) break;

    const double h = ds / static_cast<double>(kSubsteps);
    for (std::size_t j = 0; j < kSubsteps; ++j) {
      const double dpsi = plan.curvature(s + (static_cast<double>(j) + 0.5) * h) * h;
      if (h > 0.0) p = destination_point(p, heading + 0.5 * dpsi, h);
      heading += dpsi;
    }
    s += ds;
    v = v_next;
    gnss.advance();
  }
  return traj;
}

json route_to_json(const Route& route) {
  json legs = json::array();
  for (const auto& leg : route.legs)
    legs.push_back({{"length_m", leg.length_m}, {"turn_deg", leg.turn_deg}, {"speed_mps", leg.speed_mps},
                    {"dwell_s", leg.dwell_s}});
  return {{"origin", {{"lat", route.origin_lat_deg}, {"lon", route.origin_lon_deg}}},
          {"initial_bearing_deg", route.initial_bearing_deg},
          {"t0", route.start_time_s},
          {"turn_speed_mps", route.turn_speed_mps},
          {"legs", legs}};
}

Route route_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("legs") || !doc.at("legs").is_array())
    throw Error(Errc::Parse, "route document needs a 'legs' array");
  Route r;
  if (doc.contains("origin")) {
    r.origin_lat_deg = json_number(doc.at("origin"), "lat", r.origin_lat_deg);
    r.origin_lon_deg = json_number(doc.at("origin"), "lon", r.origin_lon_deg);
  }
  r.initial_bearing_deg = json_number(doc, "initial_bearing_deg", r.initial_bearing_deg);
  r.start_time_s = json_number(doc, "t0", r.start_time_s);
  r.turn_speed_mps = json_number(doc, "turn_speed_mps", r.turn_speed_mps);
  for (const auto& l : doc.at("legs")) {
    if (!l.is_object() || !l.contains("length_m") || !l.contains("speed_mps"))
      throw Error(Errc::Parse, "each leg needs length_m and speed_mps");
    RouteLeg leg;
    leg.length_m = json_number(l, "length_m", 0.0);
    leg.turn_deg = json_number(l, "turn_deg", 0.0);
    leg.speed_mps = json_number(l, "speed_mps", 0.0);
    leg.dwell_s = json_number(l, "dwell_s", 0.0);
    r.legs.push_back(leg);
  }
  validate_route(r);
  return r;
}

Route load_route(const std::string& path) { return route_from_json(read_json_file(path)); }

Route urban_route(Rng& rng) {
  Route r;
  randomize_origin(r, rng);
  r.legs.push_back({rng.uniform(80.0, 150.0), signed_turn(rng), rng.uniform(9.0, 13.0), 0.0});
  r.legs.push_back({rng.uniform(80.0, 150.0), signed_turn(rng), rng.uniform(9.0, 13.0), 0.0});
  r.legs.push_back({rng.uniform(100.0, 200.0), 0.0, rng.uniform(10.0, 14.0), 0.0});
  return r;
}

Route highway_route(Rng& rng) {
  Route r;
  randomize_origin(r, rng);
  r.legs.push_back({rng.uniform(500.0, 800.0), 0.0, rng.uniform(23.0, 27.0), 0.0});
  return r;
}

Route stop_route(Rng& rng) {
  Route r;
  randomize_origin(r, rng);
  r.legs.push_back({rng.uniform(60.0, 120.0), 0.0, rng.uniform(8.0, 12.0), rng.uniform(25.0, 35.0)});
  return r;
}

Route stop_and_go_route(Rng& rng) {
  Route r;
  randomize_origin(r, rng);
  r.legs.push_back({rng.uniform(60.0, 100.0), 0.0, rng.uniform(8.0, 12.0), rng.uniform(3.0, 6.0)});
  r.legs.push_back({rng.uniform(60.0, 100.0), signed_turn(rng), rng.uniform(9.0, 12.0), 0.0});
  r.legs.push_back({rng.uniform(60.0, 100.0), 0.0, rng.uniform(9.0, 12.0), 0.0});
  return r;
}

std::vector<Trajectory> synthesize_corpus(std::size_t count, std::uint64_t seed, double rate_hz,
                                          const NoiseModel& noise) {
  Rng rng(seed);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Route r;
    switch (i % 3) {
      case 0: r = urban_route(rng); break;
      case 1: r = highway_route(rng); break;
      default: r = stop_and_go_route(rng); break;
    }
    out.push_back(generate_synthetic_trajectory(r, rate_hz, noise, derive_seed(seed, i)));
    out.back().meta["route"] = route_to_json(r).dump();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Attacks

const char* to_string(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::TurnByTurn: return "TurnByTurn";
    case AttackKind::Overshoot: return "Overshoot";
    case AttackKind::Stop: return "Stop";
  }
  return "?";
}

const char* to_string(AttackVariant variant) noexcept {
  return variant == AttackVariant::Blatant ? "blatant" : "evasive";
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "TurnByTurn") return AttackKind::TurnByTurn;
  if (s == "Overshoot") return AttackKind::Overshoot;
  if (s == "Stop") return AttackKind::Stop;
  throw Error(Errc::Parse, "unknown attack kind '" + s + "'");
}

AttackVariant attack_variant_from_string(const std::string& s) {
  if (s == "blatant") return AttackVariant::Blatant;
  if (s == "evasive") return AttackVariant::Evasive;
  throw Error(Errc::Parse, "unknown attack variant '" + s + "'");
}

json attack_spec_to_json(const AttackSpec& spec) {
  json params = json::object();
  if (spec.kind == AttackKind::TurnByTurn) {
    params = {{"offset_m", spec.turn_by_turn.offset_m},
              {"offset_bearing_deg", spec.turn_by_turn.offset_bearing_deg},
              {"bearing_offset_deg", spec.turn_by_turn.bearing_offset_deg},
              {"mirror_turns", spec.turn_by_turn.mirror_turns}};
  } else if (spec.kind == AttackKind::Stop) {
    params = {{"apparent_speed_mps", spec.stop.apparent_speed_mps},
              {"straight_m", spec.stop.straight_m},
              {"turn_deg", spec.stop.turn_deg}};
  }
  return {{"kind", to_string(spec.kind)},
          {"start_t", spec.start_t},
          {"variant", to_string(spec.variant)},
          {"params", params},
          {"seed", spec.seed},
          {"gnss_sigma_m", spec.gnss_sigma_m},
          {"gnss_correlation_s", spec.gnss_correlation_s}};
}

AttackSpec attack_spec_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc.contains("start_t"))
    throw Error(Errc::Parse, "attack spec needs kind and start_t");
  AttackSpec spec;
  try {
    spec.kind = attack_kind_from_string(doc.at("kind").get<std::string>());
    spec.start_t = doc.at("start_t").get<double>();
    if (doc.contains("variant")) spec.variant = attack_variant_from_string(doc.at("variant").get<std::string>());
    if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.gnss_sigma_m = json_number(doc, "gnss_sigma_m", spec.gnss_sigma_m);
    spec.gnss_correlation_s = json_number(doc, "gnss_correlation_s", spec.gnss_correlation_s);
    const json params = doc.value("params", json::object());
    if (spec.kind == AttackKind::TurnByTurn) {
      auto& p = spec.turn_by_turn;
      p.offset_m = json_number(params, "offset_m", p.offset_m);
      p.offset_bearing_deg = json_number(params, "offset_bearing_deg", p.offset_bearing_deg);
      p.bearing_offset_deg = json_number(params, "bearing_offset_deg", p.bearing_offset_deg);
      if (params.contains("mirror_turns")) p.mirror_turns = params.at("mirror_turns").get<bool>();
    } else if (spec.kind == AttackKind::Stop) {
      auto& p = spec.stop;
      p.apparent_speed_mps = json_number(params, "apparent_speed_mps", p.apparent_speed_mps);
      p.straight_m = json_number(params, "straight_m", p.straight_m);
      p.turn_deg = json_number(params, "turn_deg", p.turn_deg);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("attack spec: ") + e.what());
  }
  return spec;
}

AttackScenario inject_turn_by_turn(const Trajectory& clean, const AttackSpec& spec) {
  require_kind(spec, AttackKind::TurnByTurn);
  const auto& p = spec.turn_by_turn;
  if (!(p.offset_m >= 0.0) || !std::isfinite(p.offset_bearing_deg) || !std::isfinite(p.bearing_offset_deg))
    throw Error(Errc::InvalidInput, "turn-by-turn parameters invalid");
  const std::size_t k0 = first_index_at_or_after(clean, spec.start_t);
  AttackScenario sc = start_scenario(clean, spec, k0);
  auto& rec = sc.spoofed.records;

  const double h0 = heading_at(clean, k0, 0.5);
  GeoPoint cur = destination_point(geo_point(clean.records[k0]), h0 + p.offset_bearing_deg * kDeg, p.offset_m);
  rec[k0].lat = cur.lat_deg();
  rec[k0].lon = cur.lon_deg();
  for (std::size_t k = k0 + 1; k < clean.size(); ++k) {
    const GeoPoint a = geo_point(clean.records[k - 1]);
    const GeoPoint b = geo_point(clean.records[k]);
    const double d = haversine_distance(a, b);
    double bearing = initial_bearing(a, b);
    if (p.mirror_turns) bearing = 2.0 * h0 - bearing;
    bearing += p.bearing_offset_deg * kDeg;
    cur = destination_point(cur, bearing, d);
    rec[k].lat = cur.lat_deg();
    rec[k].lon = cur.lon_deg();
  }
  return sc;
}

AttackScenario inject_overshoot(const Trajectory& clean, const AttackSpec& spec) {
  require_kind(spec, AttackKind::Overshoot);
  const std::size_t k0 = first_index_at_or_after(clean, spec.start_t);
  if (clean.records[k0].speed * kFeetToMeters < 1.0)
    throw Error(Errc::VehicleNotMoving, "overshoot needs the vehicle moving at >= 1 m/s at start_t");
  AttackScenario sc = start_scenario(clean, spec, k0);

  Rng rng(spec.seed);
  GaussMarkov2d noise(spec.gnss_sigma_m, spec.gnss_correlation_s, clean.nominal_period(), true, rng);
  const GeoPoint frozen = geo_point(clean.records[k0]);
  for (std::size_t k = k0 + 1; k < clean.size(); ++k) {
    noise.advance();
    apply_offset(sc.spoofed.records[k], frozen, noise.east(), noise.north());
  }
  return sc;
}

AttackScenario inject_stop(const Trajectory& clean, const AttackSpec& spec) {
  require_kind(spec, AttackKind::Stop);
  const auto& p = spec.stop;
  if (!(p.apparent_speed_mps > 0.0) || !(p.straight_m > 0.0) || !(std::abs(p.turn_deg) <= 180.0))
    throw Error(Errc::InvalidInput, "stop parameters invalid");
  const std::size_t k0 = first_index_at_or_after(clean, spec.start_t);
  const double t0 = clean.records[k0].t;
  constexpr double kStandstillMps = 0.05;
  constexpr double kStandstillSpan = 1.0;
  if (t0 - clean.start_t() < kStandstillSpan - 1e-6)
    throw Error(Errc::VehicleNotStopped, "no standstill history before start_t");
  for (std::size_t k = k0 + 1; k-- > 0;) {
    if (clean.records[k].t < t0 - kStandstillSpan - 1e-9) break;
    if (clean.records[k].speed * kFeetToMeters >= kStandstillMps)
      throw Error(Errc::VehicleNotStopped, "vehicle not at standstill for 1 s before start_t");
  }
  AttackScenario sc = start_scenario(clean, spec, k0);

  Route fake;
  fake.origin_lat_deg = clean.records[k0].lat;
  fake.origin_lon_deg = clean.records[k0].lon;
  fake.initial_bearing_deg = heading_at(clean, k0, 1.0) / kDeg;
  fake.start_time_s = t0;
  fake.turn_speed_mps = p.apparent_speed_mps;
  fake.legs.push_back({p.straight_m, p.turn_deg, p.apparent_speed_mps, 0.0});
  fake.legs.push_back({1.0e7, 0.0, p.apparent_speed_mps, 0.0});
  const std::size_t n = clean.size() - k0;
  const Trajectory path = generate_synthetic_trajectory(fake, clean.nominal_rate_hz, NoiseModel::none(), 0, n);

  Rng rng(spec.seed);
  GaussMarkov2d noise(spec.gnss_sigma_m, spec.gnss_correlation_s, clean.nominal_period(), true, rng);
  for (std::size_t j = 1; j < n && j < path.size(); ++j) {
    noise.advance();
    apply_offset(sc.spoofed.records[k0 + j], geo_point(path.records[j]), noise.east(), noise.north());
  }
  return sc;
}

AttackScenario inject(const Trajectory& clean, const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackKind::TurnByTurn: return inject_turn_by_turn(clean, spec);
    case AttackKind::Overshoot: return inject_overshoot(clean, spec);
    case AttackKind::Stop: return inject_stop(clean, spec);
  }
  throw Error(Errc::SpecMismatch, "unknown attack kind");
}

AttackScenario clean_control(std::string id, const Trajectory& clean) {
  AttackScenario sc;
  sc.id = std::move(id);
  sc.clean = clean;
  sc.spoofed = clean;
  return sc;
}

std::vector<AttackScenario> default_scenario_suite(std::uint64_t seed, double rate_hz, const NoiseModel& noise) {
  std::vector<AttackScenario> out;
  auto id = [](const char* stem, std::size_t i) {
    return std::string(stem) + (i < 10 ? "-0" : "-") + std::to_string(i);
  };
  constexpr double kBearingOffsets[] = {0.0, 5.0, 10.0, 15.0, 20.0};

  for (std::size_t i = 0; i < 10; ++i) {
    Rng rng(derive_seed(seed, 100 + i));
    const Trajectory clean = generate_synthetic_trajectory(urban_route(rng), rate_hz, noise, derive_seed(seed, 200 + i));
    AttackSpec spec;
    spec.kind = AttackKind::TurnByTurn;
    spec.seed = derive_seed(seed, 300 + i);
    spec.gnss_sigma_m = noise.gnss_sigma_m;
    spec.gnss_correlation_s = noise.gnss_correlation_s;
    spec.start_t = clean.start_t() + rng.uniform(0.3, 0.8) * (first_turn_time(clean) - clean.start_t());
    spec.turn_by_turn.offset_m = 5.0 + 0.5 * static_cast<double>(i % 5);
    spec.turn_by_turn.offset_bearing_deg = i % 2 ? -90.0 : 90.0;
    spec.turn_by_turn.bearing_offset_deg = kBearingOffsets[i % 5];
    out.push_back(inject_turn_by_turn(clean, spec));
    out.back().id = id("turn-by-turn", i);
  }

  for (std::size_t i = 0; i < 10; ++i) {
    Rng rng(derive_seed(seed, 400 + i));
    const bool blatant = i < 5;
    const Route route = blatant ? highway_route(rng) : urban_route(rng);
    const Trajectory clean = generate_synthetic_trajectory(route, rate_hz, noise, derive_seed(seed, 500 + i));
    AttackSpec spec;
    spec.kind = AttackKind::Overshoot;
    spec.variant = blatant ? AttackVariant::Blatant : AttackVariant::Evasive;
    spec.seed = derive_seed(seed, 600 + i);
    spec.gnss_sigma_m = noise.gnss_sigma_m;
    spec.gnss_correlation_s = noise.gnss_correlation_s;
    const double horizon = blatant ? clean.end_t() : first_turn_time(clean);
    spec.start_t = clean.start_t() + rng.uniform(0.3, 0.7) * (horizon - clean.start_t());
    out.push_back(inject_overshoot(clean, spec));
    out.back().id = id("overshoot", i);
  }

  for (std::size_t i = 0; i < 10; ++i) {
    Rng rng(derive_seed(seed, 700 + i));
    const Trajectory clean = generate_synthetic_trajectory(stop_route(rng), rate_hz, noise, derive_seed(seed, 800 + i));
    const bool evasive = i < 6;
    const bool turn = i < 4 || i == 6 || i == 7;
    AttackSpec spec;
    spec.kind = AttackKind::Stop;
    spec.variant = evasive ? AttackVariant::Evasive : AttackVariant::Blatant;
    spec.seed = derive_seed(seed, 900 + i);
    spec.gnss_sigma_m = noise.gnss_sigma_m;
    spec.gnss_correlation_s = noise.gnss_correlation_s;
    spec.start_t = first_stop_time(clean) + rng.uniform(2.0, 4.0);
    spec.stop.apparent_speed_mps = evasive ? 2.0 : 25.0;
    spec.stop.straight_m = evasive ? 6.0 : 25.0;
    spec.stop.turn_deg = turn ? (i % 2 ? -90.0 : 90.0) : 0.0;
    out.push_back(inject_stop(clean, spec));
    out.back().id = id("stop", i);
  }
  return out;
}

std::vector<AttackScenario> clean_control_suite(std::size_t count, std::uint64_t seed, double rate_hz,
                                                const NoiseModel& noise) {
  std::vector<AttackScenario> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 1000 + i));
    Route r;
    switch (i % 4) {
      case 0: r = urban_route(rng); break;
      case 1: r = highway_route(rng); break;
      case 2: r = stop_and_go_route(rng); break;
      default: r = stop_route(rng); break;
    }
    const Trajectory clean = generate_synthetic_trajectory(r, rate_hz, noise, derive_seed(seed, 1100 + i));
    out.push_back(clean_control(std::string("clean-") + (i < 10 ? "0" : "") + std::to_string(i), clean));
  }
  return out;
}

void write_bundle(const std::string& dir, const AttackScenario& scenario) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  write_trajectory_csv((root / "clean.csv").string(), scenario.clean);
  write_trajectory_csv((root / "spoofed.csv").string(), scenario.spoofed);
  json spec = scenario.spec ? attack_spec_to_json(*scenario.spec) : json{{"kind", "None"}};
  spec["id"] = scenario.id;
  write_json_file(root / "spec.json", spec);
  json gt = {{"attack_interval", nullptr}};
  if (scenario.ground_truth) gt["attack_interval"] = {scenario.ground_truth->start_t, scenario.ground_truth->end_t};
  write_json_file(root / "ground_truth.json", gt);
}

AttackScenario read_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  AttackScenario sc;
  sc.clean = read_trajectory_csv((root / "clean.csv").string());
  sc.spoofed = read_trajectory_csv((root / "spoofed.csv").string());
  const json spec = read_json_file(root / "spec.json");
  sc.id = spec.value("id", root.filename().string());
  if (spec.value("kind", std::string("None")) != "None") sc.spec = attack_spec_from_json(spec);
  const json gt = read_json_file(root / "ground_truth.json");
  if (gt.contains("attack_interval") && gt.at("attack_interval").is_array()) {
    const auto& iv = gt.at("attack_interval");
    if (iv.size() != 2) throw Error(Errc::Parse, "attack_interval must have two entries");
    sc.ground_truth = AttackInterval{iv.at(0).get<double>(), iv.at(1).get<double>()};
  }
  if (sc.clean.size() != sc.spoofed.size()) throw Error(Errc::Parse, "clean and spoofed lengths differ");
  return sc;
}

}  // namespace gnssguard
