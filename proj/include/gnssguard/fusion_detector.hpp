#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gnssguard/attack_forge.hpp"
#include "gnssguard/motion_monitor.hpp"
#include "gnssguard/shift_predictor.hpp"
#include "gnssguard/trajectory.hpp"
#include "gnssguard/turn_detector.hpp"

namespace gnssguard {

enum class Strategy { ShiftPrediction = 0, TurnDetection = 1, MotionState = 2 };
inline constexpr std::size_t kStrategyCount = 3;
inline constexpr std::array<Strategy, kStrategyCount> kStrategies = {
    Strategy::ShiftPrediction, Strategy::TurnDetection, Strategy::MotionState};

const char* to_string(Strategy s) noexcept;

struct ShiftEvidence {
  double perceived_m = 0.0;
  double predicted_m = 0.0;
  double difference_m = 0.0;
};

struct TurnEvidence {
  TurnAlarmReason reason = TurnAlarmReason::NoGnssTurn;
  std::optional<TurnLabel> verdict;  // empty for GNSS-only turns
  std::optional<double> gnss_change_deg;
  double window_start_t = 0.0;
};

struct MotionEvidence {
  MotionAlarmKind kind = MotionAlarmKind::GhostMotion;
  double gnss_displacement_m = 0.0;
  double speed_integral_m = 0.0;
  double window_start_t = 0.0;
};

using AlarmEvidence = std::variant<ShiftEvidence, TurnEvidence, MotionEvidence>;

struct Alarm {
  double t = 0.0;
  Strategy strategy = Strategy::ShiftPrediction;
  AlarmEvidence evidence;
};

struct DetectorConfig {
  SegmentGate gate;
  std::size_t k = 1;
  std::size_t fastdtw_radius = 1;  // 0 selects exact DTW
  bool z_normalize = false;
  double gnss_turn_threshold_deg = kGnssTurnThresholdDeg;
  double heading_noise_floor_m = 0.05;
  // Sliding scan for GNSS turns with no steering activity.
  double turn_scan_window_s = 10.0;
  double turn_scan_hop_s = 1.0;
  double turn_scan_floor_m = 0.5;
  MotionConfig motion;
  std::optional<double> threshold_override;

  void validate() const;
};

struct ShiftTracePoint {
  double t = 0.0;
  double perceived_m = 0.0;
  double predicted_m = 0.0;
  double difference_m = 0.0;
};

struct SkippedWindow {
  Strategy strategy = Strategy::ShiftPrediction;
  double t0 = 0.0;
  double t1 = 0.0;
  std::string reason;
};

struct DetectionResult {
  std::vector<Alarm> alarms;  // sorted by (t, strategy)
  std::vector<ShiftTracePoint> shift_trace;
  std::vector<SkippedWindow> skipped;
  double threshold = 0.0;
  double motion_floor = 0.0;
};

// Individual evaluators. Each appends its alarms and diagnostics to `out`.
void detect_shift_anomalies(const Trajectory& traj, const PredictionModel& model, double threshold,
                            DetectionResult& out);
void detect_turn_anomalies(const Trajectory& traj, std::span<const TurnTemplate> templates,
                           const DetectorConfig& cfg, DetectionResult& out);
void detect_motion_anomalies(const Trajectory& traj, const MotionConfig& cfg, double motion_floor,
                             DetectionResult& out);

/// All three strategies over one trajectory; alarms merged in (t, strategy) order.
DetectionResult run_detection(const Trajectory& traj, const PredictionModel& model,
                              std::span<const TurnTemplate> templates, const DetectorConfig& cfg);

// ---------------------------------------------------------------------------
// Latency

struct LatencyStats {
  std::size_t invocations = 0;
  double mean_s = 0.0;
  double max_s = 0.0;
};

inline constexpr std::size_t kMinLatencyInvocations = 100;

/// Times `op(i)` for i in [0, invocations). Requires at least 100 invocations.
LatencyStats measure_latency(const std::function<void(std::size_t)>& op, std::size_t invocations);

/// Per-invocation latency of one strategy on `traj`, inputs prepared up front
/// so only the strategy call is timed. Strategy 2 reports zero invocations
/// when the trajectory holds no complete turn.
LatencyStats measure_strategy_latency(Strategy strategy, const Trajectory& traj, const PredictionModel& model,
                                      std::span<const TurnTemplate> templates, const DetectorConfig& cfg,
                                      std::size_t invocations = kMinLatencyInvocations);

// ---------------------------------------------------------------------------
// Scenario evaluation

struct DetectionReport {
  std::string scenario_id;
  std::string kind;     // TurnByTurn, Overshoot, Stop or Clean
  std::string variant;  // blatant / evasive, empty for clean controls
  bool has_attack = false;
  bool detected = false;
  std::optional<double> first_alarm_t;
  std::optional<double> detection_delay_s;
  std::array<bool, kStrategyCount> strategies_fired{};
  std::array<std::size_t, kStrategyCount> alarms_in_attack{};
  std::size_t false_alarms_before_attack = 0;
  std::size_t skipped_windows = 0;
  std::array<LatencyStats, kStrategyCount> latency{};
};

struct SummaryRow {
  std::string kind;
  std::size_t scenarios = 0;
  std::size_t detected = 0;
  std::array<double, kStrategyCount> fired_fraction{};
  std::size_t false_alarms = 0;
};

struct EvaluationOptions {
  bool measure_latency = true;
  std::size_t latency_invocations = kMinLatencyInvocations;
  bool keep_detections = false;
};

struct EvaluationResult {
  std::vector<DetectionReport> reports;
  std::vector<SummaryRow> summary;
  std::vector<DetectionResult> detections;  // filled when keep_detections is set
};

DetectionReport make_report(const AttackScenario& scenario, const DetectionResult& detection);
std::vector<SummaryRow> summarize(std::span<const DetectionReport> reports);

EvaluationResult evaluate_scenarios(std::span<const AttackScenario> scenarios, const PredictionModel& model,
                                    std::span<const TurnTemplate> templates, const DetectorConfig& cfg,
                                    const EvaluationOptions& options = {});

}  // namespace gnssguard
