#pragma once

#include <optional>
#include <span>
#include <string>

#include "json.hpp"

#include "gnssguard/fusion_detector.hpp"

namespace gnssguard {

nlohmann::json alarm_to_json(const Alarm& alarm);
nlohmann::json detection_to_json(const DetectionResult& detection);

/// Reports without latency figures, so the output is reproducible.
nlohmann::json reports_to_json(std::span<const DetectionReport> reports);
nlohmann::json latency_to_json(std::span<const DetectionReport> reports);

/// kind,scenarios,detected,ShiftPrediction,TurnDetection,MotionState,false_alarms
std::string summary_to_csv(std::span<const SummaryRow> rows);

/// |perceived - predicted| against time with the threshold line and, when
/// given, a marker at the attack start.
std::string render_shift_plot_svg(const DetectionResult& detection, std::optional<double> attack_start_t,
                                  const std::string& title);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace gnssguard
