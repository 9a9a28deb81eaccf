#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gnssguard/random.hpp"
#include "gnssguard/trajectory.hpp"

namespace gnssguard {

inline constexpr double kTurnSampleHz = 5.0;

enum class TurnLabel { Left, Right };

const char* to_string(TurnLabel label) noexcept;
TurnLabel turn_label_from_string(const std::string& s);

struct TurnTemplate {
  TurnLabel label = TurnLabel::Right;
  std::vector<double> series;  // steering degrees at 5 Hz
  std::string source_id;
};

struct TurnSegment {
  double start_t = 0.0;
  double end_t = 0.0;
  TimeSeries series;  // steering degrees at 5 Hz covering [start_t, end_t]
  // False when the excursion runs into the end of the input, i.e. the
  // maneuver may still be in progress.
  bool complete = true;
};

struct TurnVerdict {
  TurnLabel label = TurnLabel::Right;
  std::vector<double> neighbor_distances;  // k nearest, ascending
  TurnSegment segment;
};

struct SegmentGate {
  double angle_threshold_deg = 90.0;
  double min_duration_s = 1.0;
  double merge_gap_s = 0.5;
  double context_pad_s = 1.0;
};

/// Maximal runs where |steer| >= threshold, merged across short
/// interruptions, kept when at least min_duration long, then padded with
/// context. Padding never makes neighbouring segments overlap.
std::vector<TurnSegment> segment_turns(const TimeSeries& steering_5hz, const SegmentGate& gate = {});

using DistanceFn = std::function<double(std::span<const double>, std::span<const double>)>;

/// Distance function backed by fastdtw (radius > 0) or dtw_exact (radius == 0).
DistanceFn dtw_distance_fn(std::size_t fastdtw_radius, bool z_normalize = false);

/// Majority label among the k nearest templates. Ties go to the label of the
/// single nearest neighbour. Neighbours are ordered by (distance, label,
/// source_id) so the verdict does not depend on template order.
TurnVerdict knn_classify(const TurnSegment& segment, std::span<const TurnTemplate> templates, std::size_t k,
                         const DistanceFn& distance);

/// Signed change of course-over-ground from the first displacement vector of
/// the window to its last, degrees, positive = clockwise (right). Fixes are
/// accumulated until they have moved at least `noise_floor_m` from the last
/// anchor. Returns nullopt when no displacement clears the floor.
std::optional<double> gnss_heading_change(const Trajectory& window, double noise_floor_m = 0.05);

enum class TurnAlarmReason {
  NoGnssTurn,              // steering shows a turn, GNSS does not
  DirectionContradiction,  // steering and GNSS turn opposite ways
  GnssTurnWithoutSteering  // GNSS turns while steering stays flat
};

const char* to_string(TurnAlarmReason reason) noexcept;

struct TurnAlarm {
  TurnAlarmReason reason;
};

inline constexpr double kGnssTurnThresholdDeg = 30.0;

std::optional<TurnAlarm> check_turn_consistency(TurnLabel verdict, std::optional<double> gnss_change_deg,
                                                double turn_threshold_deg = kGnssTurnThresholdDeg);

// ---------------------------------------------------------------------------
// Template banks

struct TemplateSynthesis {
  double amplitude_min_deg = 200.0;
  double amplitude_max_deg = 360.0;
  double duration_min_s = 3.0;
  double duration_max_s = 6.0;
  double duration_jitter = 0.3;  // relative, applied on top of the base duration
  double noise_sigma_deg = 3.0;
  double correction_ratio = 0.25;  // counter-steer lobe amplitude relative to the main lobe
};

/// One lobed steering curve at 5 Hz: a main lobe in the turn direction
/// followed by a shorter counter-steer lobe, padded with 1 s of flat context.
std::vector<double> synthesize_turn_curve(TurnLabel label, Rng& rng, const TemplateSynthesis& params = {});

/// `count` templates alternating Right/Left.
std::vector<TurnTemplate> synthesize_template_bank(std::size_t count, std::uint64_t seed,
                                                   const TemplateSynthesis& params = {});

/// JSON array of {label, hz, values[], source_id}. Banks sampled at a rate
/// other than 5 Hz are rejected unless `resample_to_5hz` is set.
std::vector<TurnTemplate> load_template_bank(const std::string& path, bool resample_to_5hz = false);
std::vector<TurnTemplate> parse_template_bank(const std::string& json_text, bool resample_to_5hz = false);
std::string template_bank_to_json(std::span<const TurnTemplate> bank);
void save_template_bank(const std::string& path, std::span<const TurnTemplate> bank);

}  // namespace gnssguard
