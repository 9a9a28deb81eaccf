#include "gnssguard/fusion_detector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gnssguard/error.hpp"

namespace gnssguard {

namespace {

// Timestamps near 1.6e9 s carry ~2e-7 s of rounding; window edges are
// widened by this much so grid-aligned samples are never lost.
constexpr double kEdgeSlack = 1e-4;

struct MotionWindow {
  double t0 = 0.0;
  Trajectory window;
};

std::vector<MotionWindow> motion_windows(const Trajectory& traj, const MotionConfig& cfg) {
  std::vector<MotionWindow> out;
  if (traj.empty()) return out;
  const double start = traj.start_t();
  for (std::size_t j = 0;; ++j) {
    const double ws = start + static_cast<double>(j) * cfg.hop_s;
    const double we = ws + cfg.window_s;
    if (we > traj.end_t() + kEdgeSlack) break;
    out.push_back({ws, slice(traj, ws - kEdgeSlack, we + kEdgeSlack)});
  }
  return out;
}

struct MotionOutcome {
  std::optional<MotionAlarm> alarm;
  double displacement = 0.0;
  double integral = 0.0;
};

MotionOutcome evaluate_motion_window(const Trajectory& w, const MotionConfig& cfg, double floor) {
  MotionOutcome r;
  const bool standstill = detect_standstill(speed_series(w), cfg);
  r.displacement = gnss_displacement(w);
  r.integral = speed_integral(w);
  r.alarm = check_motion_consistency(standstill, r.displacement, r.integral, floor);
  return r;
}

struct TurnOutcome {
  TurnVerdict verdict;
  std::optional<double> change;
  std::optional<TurnAlarm> alarm;
};

TurnOutcome evaluate_turn_segment(const Trajectory& traj, const TurnSegment& seg,
                                  std::span<const TurnTemplate> templates, const DetectorConfig& cfg,
                                  const DistanceFn& dist) {
  TurnOutcome r;
  r.verdict = knn_classify(seg, templates, cfg.k, dist);
  r.change = gnss_heading_change(slice(traj, seg.start_t - kEdgeSlack, seg.end_t + kEdgeSlack),
                                 cfg.heading_noise_floor_m);
  r.alarm = check_turn_consistency(r.verdict.label, r.change, cfg.gnss_turn_threshold_deg);
  return r;
}

double threshold_for(const PredictionModel& model, const DetectorConfig& cfg) {
  return cfg.threshold_override.value_or(model.error_threshold);
}

}  // namespace

const char* to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::ShiftPrediction: return "ShiftPrediction";
    case Strategy::TurnDetection: return "TurnDetection";
    case Strategy::MotionState: return "MotionState";
  }
  return "?";
}

void DetectorConfig::validate() const {
  if (k == 0) throw Error(Errc::InvalidConfig, "k must be at least 1");
  if (!(gate.angle_threshold_deg > 0.0) || !(gate.min_duration_s >= 0.0) || !(gate.merge_gap_s >= 0.0) ||
      !(gate.context_pad_s >= 0.0))
    throw Error(Errc::InvalidConfig, "turn gate parameters invalid");
  if (!(gnss_turn_threshold_deg > 0.0) || !(heading_noise_floor_m >= 0.0))
    throw Error(Errc::InvalidConfig, "GNSS turn parameters invalid");
  if (!(turn_scan_window_s > 0.0) || !(turn_scan_hop_s > 0.0) || !(turn_scan_floor_m >= 0.0))
    throw Error(Errc::InvalidConfig, "turn scan parameters invalid");
  if (threshold_override && !(*threshold_override > 0.0))
    throw Error(Errc::InvalidConfig, "threshold override must be positive");
  motion.validate();
}

void detect_shift_anomalies(const Trajectory& traj, const PredictionModel& model, double threshold,
                            DetectionResult& out) {
  if (traj.size() < model.window_len + 2) {
    if (!traj.empty())
      out.skipped.push_back({Strategy::ShiftPrediction, traj.start_t(), traj.end_t(), "trajectory shorter than one window"});
    return;
  }
  std::vector<ShiftSample> samples;
  try {
    samples = build_supervised_dataset(traj, model.norm, model.window_len, model.mode);
  } catch (const Error& e) {
    out.skipped.push_back({Strategy::ShiftPrediction, traj.start_t(), traj.end_t(), e.what()});
    return;
  }
  const std::vector<double> predicted = model.predict(samples);
  out.shift_trace.reserve(out.shift_trace.size() + samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = traj.records[samples[i].target_index + 1].t;
    if (!std::isfinite(predicted[i])) {
      out.skipped.push_back({Strategy::ShiftPrediction, t, t, "non-finite prediction"});
      continue;
    }
    const double perceived = samples[i].target;
    out.shift_trace.push_back({t, perceived, predicted[i], std::abs(perceived - predicted[i])});
    if (const auto a = check_shift(perceived, predicted[i], threshold))
      out.alarms.push_back({t, Strategy::ShiftPrediction, ShiftEvidence{perceived, predicted[i], a->difference}});
  }
}

void detect_turn_anomalies(const Trajectory& traj, std::span<const TurnTemplate> templates,
                           const DetectorConfig& cfg, DetectionResult& out) {
  if (traj.size() < 2) return;
  TimeSeries steering;
  try {
    steering = resample(steering_series(traj), kTurnSampleHz);
  } catch (const Error& e) {
    out.skipped.push_back({Strategy::TurnDetection, traj.start_t(), traj.end_t(), e.what()});
    return;
  }

  const DistanceFn dist = dtw_distance_fn(cfg.fastdtw_radius, cfg.z_normalize);
  for (const auto& seg : segment_turns(steering, cfg.gate)) {
    if (!seg.complete) {
      out.skipped.push_back({Strategy::TurnDetection, seg.start_t, seg.end_t, "turn segment touches the stream edge"});
      continue;
    }
    try {
      const TurnOutcome r = evaluate_turn_segment(traj, seg, templates, cfg, dist);
      if (r.alarm)
        out.alarms.push_back({seg.end_t, Strategy::TurnDetection,
                              TurnEvidence{r.alarm->reason, r.verdict.label, r.change, seg.start_t}});
    } catch (const Error& e) {
      out.skipped.push_back({Strategy::TurnDetection, seg.start_t, seg.end_t, e.what()});
    }
  }

  // GNSS course changes with no steering activity anywhere near them.
  SegmentGate activity_gate = cfg.gate;
  activity_gate.min_duration_s = 0.0;
  const auto activity = segment_turns(steering, activity_gate);
  const double start = traj.start_t();
  for (std::size_t j = 0;; ++j) {
    const double ws = start + static_cast<double>(j) * cfg.turn_scan_hop_s;
    const double we = ws + cfg.turn_scan_window_s;
    if (we > traj.end_t() + kEdgeSlack) break;
    const bool steered = std::any_of(activity.begin(), activity.end(), [&](const TurnSegment& a) {
      return a.start_t <= we + kEdgeSlack && a.end_t >= ws - kEdgeSlack;
    });
    if (steered) continue;
    const Trajectory w = slice(traj, ws - kEdgeSlack, we + kEdgeSlack);
    const auto change = gnss_heading_change(w, cfg.turn_scan_floor_m);
    if (change && std::abs(*change) >= cfg.gnss_turn_threshold_deg)
      out.alarms.push_back({w.end_t(), Strategy::TurnDetection,
                            TurnEvidence{TurnAlarmReason::GnssTurnWithoutSteering, std::nullopt, change, ws}});
  }
}

void detect_motion_anomalies(const Trajectory& traj, const MotionConfig& cfg, double motion_floor,
                             DetectionResult& out) {
  for (const auto& mw : motion_windows(traj, cfg)) {
    try {
      const MotionOutcome r = evaluate_motion_window(mw.window, cfg, motion_floor);
      if (r.alarm)
        out.alarms.push_back({mw.window.end_t(), Strategy::MotionState,
                              MotionEvidence{r.alarm->kind, r.displacement, r.integral, mw.t0}});
    } catch (const Error& e) {
      out.skipped.push_back({Strategy::MotionState, mw.t0, mw.t0 + cfg.window_s, e.what()});
    }
  }
}

DetectionResult run_detection(const Trajectory& traj, const PredictionModel& model,
                              std::span<const TurnTemplate> templates, const DetectorConfig& cfg) {
  cfg.validate();
  DetectionResult out;
  out.threshold = threshold_for(model, cfg);
  out.motion_floor = cfg.motion.motion_floor(out.threshold);
  detect_shift_anomalies(traj, model, out.threshold, out);
  detect_turn_anomalies(traj, templates, cfg, out);
  detect_motion_anomalies(traj, cfg.motion, out.motion_floor, out);
  std::stable_sort(out.alarms.begin(), out.alarms.end(), [](const Alarm& a, const Alarm& b) {
    if (a.t != b.t) return a.t < b.t;
    return static_cast<int>(a.strategy) < static_cast<int>(b.strategy);
  });
  return out;
}

// ---------------------------------------------------------------------------

LatencyStats measure_latency(const std::function<void(std::size_t)>& op, std::size_t invocations) {
  if (invocations < kMinLatencyInvocations)
    throw Error(Errc::InvalidInput, "latency needs at least 100 invocations");
  using clock = std::chrono::steady_clock;
  LatencyStats s;
  s.invocations = invocations;
  double total = 0.0;
  for (std::size_t i = 0; i < invocations; ++i) {
    const auto a = clock::now();
    op(i);
    const auto b = clock::now();
    const double dt = std::chrono::duration<double>(b - a).count();
    total += dt;
    s.max_s = std::max(s.max_s, dt);
  }
  s.mean_s = total / static_cast<double>(invocations);
  return s;
}

LatencyStats measure_strategy_latency(Strategy strategy, const Trajectory& traj, const PredictionModel& model,
                                      std::span<const TurnTemplate> templates, const DetectorConfig& cfg,
                                      std::size_t invocations) {
  const double threshold = threshold_for(model, cfg);
  volatile double sink = 0.0;
  switch (strategy) {
    case Strategy::ShiftPrediction: {
      if (traj.size() < model.window_len + 2) return {};
      const auto samples = build_supervised_dataset(traj, model.norm, model.window_len, model.mode);
      if (samples.empty()) return {};
      return measure_latency(
          [&](std::size_t i) {
            const auto& s = samples[i % samples.size()];
            const double p = model.predict(s.window);
            sink = sink + (check_shift(s.target, p, threshold) ? 1.0 : 0.0);
          },
          invocations);
    }
    case Strategy::TurnDetection: {
      if (traj.size() < 2) return {};
      const auto steering = resample(steering_series(traj), kTurnSampleHz);
      std::vector<TurnSegment> segs;
      for (auto& seg : segment_turns(steering, cfg.gate))
        if (seg.complete) segs.push_back(std::move(seg));
      if (segs.empty()) return {};
      const DistanceFn dist = dtw_distance_fn(cfg.fastdtw_radius, cfg.z_normalize);
      return measure_latency(
          [&](std::size_t i) {
            const auto r = evaluate_turn_segment(traj, segs[i % segs.size()], templates, cfg, dist);
            sink = sink + (r.alarm ? 1.0 : 0.0);
          },
          invocations);
    }
    case Strategy::MotionState: {
      const auto windows = motion_windows(traj, cfg.motion);
      if (windows.empty()) return {};
      const double floor = cfg.motion.motion_floor(threshold);
      return measure_latency(
          [&](std::size_t i) {
            const auto r = evaluate_motion_window(windows[i % windows.size()].window, cfg.motion, floor);
            sink = sink + (r.alarm ? 1.0 : 0.0);
          },
          invocations);
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

DetectionReport make_report(const AttackScenario& scenario, const DetectionResult& detection) {
  DetectionReport r;
  r.scenario_id = scenario.id;
  r.kind = scenario.spec ? to_string(scenario.spec->kind) : "Clean";
  r.variant = scenario.spec ? to_string(scenario.spec->variant) : "";
  r.has_attack = scenario.ground_truth.has_value();
  r.skipped_windows = detection.skipped.size();
  if (!r.has_attack) {
    r.false_alarms_before_attack = detection.alarms.size();
    return r;
  }
  const double start = scenario.ground_truth->start_t;
  for (const auto& a : detection.alarms) {
    if (a.t < start) {
      ++r.false_alarms_before_attack;
      continue;
    }
    const auto idx = static_cast<std::size_t>(a.strategy);
    r.strategies_fired[idx] = true;
    ++r.alarms_in_attack[idx];
    if (!r.first_alarm_t) r.first_alarm_t = a.t;
  }
  r.detected = r.first_alarm_t.has_value();
  if (r.detected) r.detection_delay_s = *r.first_alarm_t - start;
  return r;
}

std::vector<SummaryRow> summarize(std::span<const DetectionReport> reports) {
  static const char* const kOrder[] = {"TurnByTurn", "Overshoot", "Stop", "Clean"};
  std::vector<SummaryRow> rows;
  for (const char* kind : kOrder) {
    SummaryRow row;
    row.kind = kind;
    std::array<std::size_t, kStrategyCount> fired{};
    for (const auto& r : reports) {
      if (r.kind != kind) continue;
      ++row.scenarios;
      if (r.detected) ++row.detected;
      row.false_alarms += r.false_alarms_before_attack;
      for (std::size_t s = 0; s < kStrategyCount; ++s) fired[s] += r.strategies_fired[s] ? 1 : 0;
    }
    if (row.scenarios == 0) continue;
    for (std::size_t s = 0; s < kStrategyCount; ++s)
      row.fired_fraction[s] = static_cast<double>(fired[s]) / static_cast<double>(row.scenarios);
    rows.push_back(row);
  }
  return rows;
}

EvaluationResult evaluate_scenarios(std::span<const AttackScenario> scenarios, const PredictionModel& model,
                                    std::span<const TurnTemplate> templates, const DetectorConfig& cfg,
                                    const EvaluationOptions& options) {
  if (scenarios.empty()) throw Error(Errc::InvalidInput, "no scenarios to evaluate");
  EvaluationResult result;
  for (const auto& sc : scenarios) {
    DetectionResult det = run_detection(sc.spoofed, model, templates, cfg);
    DetectionReport rep = make_report(sc, det);
    if (options.measure_latency)
      for (Strategy s : kStrategies)
        rep.latency[static_cast<std::size_t>(s)] =
            measure_strategy_latency(s, sc.spoofed, model, templates, cfg, options.latency_invocations);
    result.reports.push_back(std::move(rep));
    if (options.keep_detections) result.detections.push_back(std::move(det));
  }
  result.summary = summarize(result.reports);
  return result;
}

}  // namespace gnssguard
