#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnssguard/random.hpp"
#include "gnssguard/trajectory.hpp"

namespace gnssguard {

// ---------------------------------------------------------------------------
// Synthetic trajectories

/// Drive `length_m` straight at `speed_mps`, optionally stop for `dwell_s`,
/// then turn by `turn_deg` (positive = right) at the route's turn speed.
struct RouteLeg {
  double length_m = 100.0;
  double turn_deg = 0.0;
  double speed_mps = 10.0;
  double dwell_s = 0.0;
};

struct Route {
  double origin_lat_deg = 37.3894;
  double origin_lon_deg = -122.0819;
  double initial_bearing_deg = 90.0;
  double start_time_s = 1'600'000'000.0;
  double turn_speed_mps = 5.0;
  std::vector<RouteLeg> legs;
};

struct NoiseModel {
  double gnss_sigma_m = 0.02;        // stationary per-axis standard deviation
  double gnss_correlation_s = 60.0;  // first-order Gauss-Markov time constant; <= 0 gives white noise
  double speed_sigma_ftps = 0.1;     // wheel-speed noise while moving

  static NoiseModel none() { return {0.0, 0.0, 0.0}; }
};

/// Vehicle constants of the kinematic model.
struct VehicleModel {
  double wheelbase_m = 2.7;
  double steering_ratio = 15.0;
  double max_curvature = 1.0 / 8.0;     // 1/m at the peak of a turn
  double counter_steer_ratio = 0.25;    // counter-steer lobe amplitude / main lobe
  double counter_steer_length = 0.3;    // counter-steer lobe length / main lobe
  double accel_mps2 = 2.0;
  double decel_mps2 = 2.5;
  double accel_pct_per_mps2 = 25.0;
};

void validate_route(const Route& route);

/// Fixes by great-circle stepping along the planned path, trapezoidal speed
/// ramps between legs, lobed steering during turns and Gauss-Markov GNSS
/// noise. `max_records` truncates the output (0 = unlimited).
Trajectory generate_synthetic_trajectory(const Route& route, double rate_hz, const NoiseModel& noise,
                                         std::uint64_t seed, std::size_t max_records = 0,
                                         const VehicleModel& vehicle = {});

nlohmann::json route_to_json(const Route& route);
Route route_from_json(const nlohmann::json& doc);
Route load_route(const std::string& path);

/// Seeded route families used to build corpora and scenario suites.
Route urban_route(Rng& rng);
Route highway_route(Rng& rng);
Route stop_route(Rng& rng);
Route stop_and_go_route(Rng& rng);

/// Mixed corpus of `count` routes (about 30 s of driving each).
std::vector<Trajectory> synthesize_corpus(std::size_t count, std::uint64_t seed, double rate_hz = 120.0,
                                          const NoiseModel& noise = {});

// ---------------------------------------------------------------------------
// Attacks

enum class AttackKind { TurnByTurn, Overshoot, Stop };
enum class AttackVariant { Blatant, Evasive };

const char* to_string(AttackKind kind) noexcept;
const char* to_string(AttackVariant variant) noexcept;
AttackKind attack_kind_from_string(const std::string& s);
AttackVariant attack_variant_from_string(const std::string& s);

struct TurnByTurnParams {
  double offset_m = 5.0;
  double offset_bearing_deg = 90.0;  // direction of the initial jump relative to the heading
  double bearing_offset_deg = 0.0;   // rotation applied to the re-projected route
  bool mirror_turns = true;          // spoofed route turns the opposite way
};

struct StopParams {
  double apparent_speed_mps = 2.0;
  double straight_m = 6.0;
  double turn_deg = 0.0;
};

struct AttackSpec {
  AttackKind kind = AttackKind::TurnByTurn;
  double start_t = 0.0;
  AttackVariant variant = AttackVariant::Blatant;
  TurnByTurnParams turn_by_turn;
  StopParams stop;
  std::uint64_t seed = 0;
  // Receiver noise added to fixes the spoofer dictates.
  double gnss_sigma_m = 0.02;
  double gnss_correlation_s = 60.0;
};

struct AttackInterval {
  double start_t = 0.0;
  double end_t = 0.0;
};

struct AttackScenario {
  std::string id;
  Trajectory clean;
  Trajectory spoofed;
  std::optional<AttackSpec> spec;           // empty for clean controls
  std::optional<AttackInterval> ground_truth;
};

nlohmann::json attack_spec_to_json(const AttackSpec& spec);
AttackSpec attack_spec_from_json(const nlohmann::json& doc);

AttackScenario inject_turn_by_turn(const Trajectory& clean, const AttackSpec& spec);
AttackScenario inject_overshoot(const Trajectory& clean, const AttackSpec& spec);
AttackScenario inject_stop(const Trajectory& clean, const AttackSpec& spec);
/// Dispatches on spec.kind.
AttackScenario inject(const Trajectory& clean, const AttackSpec& spec);

/// Clean trajectory wrapped as a control scenario.
AttackScenario clean_control(std::string id, const Trajectory& clean);

/// Ten scenarios per attack kind over a seeded grid of routes, start times
/// and parameters. Overshoot: 5 highway (blatant) + 5 urban (evasive). Stop:
/// 6 evasive + 4 blatant; 6 of them spoof a turn.
std::vector<AttackScenario> default_scenario_suite(std::uint64_t seed, double rate_hz = 120.0,
                                                   const NoiseModel& noise = {});

/// `count` clean control trajectories from the mixed route families.
std::vector<AttackScenario> clean_control_suite(std::size_t count, std::uint64_t seed, double rate_hz = 120.0,
                                                const NoiseModel& noise = {});

// Scenario bundle: clean.csv, spoofed.csv, spec.json, ground_truth.json.
void write_bundle(const std::string& dir, const AttackScenario& scenario);
AttackScenario read_bundle(const std::string& dir);

}  // namespace gnssguard
