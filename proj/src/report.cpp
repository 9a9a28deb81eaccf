#include "gnssguard/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gnssguard/error.hpp"

namespace gnssguard {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json latency_json(const LatencyStats& s) {
  return {{"invocations", s.invocations}, {"mean_s", s.mean_s}, {"max_s", s.max_s}};
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

json alarm_to_json(const Alarm& alarm) {
  json j = {{"t", alarm.t}, {"strategy", to_string(alarm.strategy)}};
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, ShiftEvidence>) {
          j["evidence"] = {{"perceived_m", ev.perceived_m},
                           {"predicted_m", ev.predicted_m},
                           {"difference_m", ev.difference_m}};
        } else if constexpr (std::is_same_v<T, TurnEvidence>) {
          j["evidence"] = {{"reason", to_string(ev.reason)},
                           {"verdict", ev.verdict ? json(to_string(*ev.verdict)) : json(nullptr)},
                           {"gnss_change_deg", optional_number(ev.gnss_change_deg)},
                           {"window_start_t", ev.window_start_t}};
        } else {
          j["evidence"] = {{"kind", to_string(ev.kind)},
                           {"gnss_displacement_m", ev.gnss_displacement_m},
                           {"speed_integral_m", ev.speed_integral_m},
                           {"window_start_t", ev.window_start_t}};
        }
      },
      alarm.evidence);
  return j;
}

json detection_to_json(const DetectionResult& detection) {
  json alarms = json::array();
  for (const auto& a : detection.alarms) alarms.push_back(alarm_to_json(a));
  json skipped = json::array();
  for (const auto& s : detection.skipped)
    skipped.push_back({{"strategy", to_string(s.strategy)}, {"t0", s.t0}, {"t1", s.t1}, {"reason", s.reason}});
  return {{"threshold_m", detection.threshold},
          {"motion_floor_m", detection.motion_floor},
          {"alarms", alarms},
          {"skipped", skipped}};
}

json reports_to_json(std::span<const DetectionReport> reports) {
  json out = json::array();
  for (const auto& r : reports) {
    json fired = json::array();
    json counts = json::object();
    for (Strategy s : kStrategies) {
      const auto i = static_cast<std::size_t>(s);
      if (r.strategies_fired[i]) fired.push_back(to_string(s));
      counts[to_string(s)] = r.alarms_in_attack[i];
    }
    out.push_back({{"scenario_id", r.scenario_id},
                   {"kind", r.kind},
                   {"variant", r.variant},
                   {"has_attack", r.has_attack},
                   {"detected", r.detected},
                   {"first_alarm_t", optional_number(r.first_alarm_t)},
                   {"detection_delay_s", optional_number(r.detection_delay_s)},
                   {"strategies_fired", fired},
                   {"alarms_in_attack", counts},
                   {"false_alarms_before_attack", r.false_alarms_before_attack},
                   {"skipped_windows", r.skipped_windows}});
  }
  return out;
}

json latency_to_json(std::span<const DetectionReport> reports) {
  json per = json::array();
  std::array<LatencyStats, kStrategyCount> agg{};
  std::array<double, kStrategyCount> total{};
  for (const auto& r : reports) {
    json entry = {{"scenario_id", r.scenario_id}};
    for (Strategy s : kStrategies) {
      const auto i = static_cast<std::size_t>(s);
      const auto& l = r.latency[i];
      entry[to_string(s)] = latency_json(l);
      agg[i].invocations += l.invocations;
      agg[i].max_s = std::max(agg[i].max_s, l.max_s);
      total[i] += l.mean_s * static_cast<double>(l.invocations);
    }
    per.push_back(entry);
  }
  json overall = json::object();
  for (Strategy s : kStrategies) {
    const auto i = static_cast<std::size_t>(s);
    if (agg[i].invocations) agg[i].mean_s = total[i] / static_cast<double>(agg[i].invocations);
    overall[to_string(s)] = latency_json(agg[i]);
  }
  return {{"overall", overall}, {"scenarios", per}};
}

std::string summary_to_csv(std::span<const SummaryRow> rows) {
  std::ostringstream out;
  out << "kind,scenarios,detected";
  for (Strategy s : kStrategies) out << ',' << to_string(s);
  out << ",false_alarms\n";
  for (const auto& r : rows) {
    out << r.kind << ',' << r.scenarios << ',' << r.detected;
    for (double f : r.fired_fraction) out << ',' << fixed(f, 4);
    out << ',' << r.false_alarms << '\n';
  }
  return out.str();
}

std::string render_shift_plot_svg(const DetectionResult& det, std::optional<double> attack_start_t,
                                  const std::string& title) {
  constexpr double kW = 800, kH = 360, kLeft = 60, kRight = 20, kTop = 30, kBottom = 40;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  const auto& tr = det.shift_trace;
  const double t0 = tr.empty() ? 0.0 : tr.front().t;
  const double t1 = tr.empty() ? 1.0 : std::max(tr.back().t, t0 + 1e-3);
  // Large jumps would flatten everything else, so the axis is capped.
  const double y_max = 3.0 * det.threshold;
  auto x = [&](double t) { return kLeft + pw * (t - t0) / (t1 - t0); };
  auto y = [&](double v) { return kTop + ph * (1.0 - std::min(v, y_max) / y_max); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kLeft << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(title)
    << "</text>\n";
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#888\"/>\n";
  if (!tr.empty()) {
    s << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1\" points=\"";
    // One point per horizontal pixel keeps the file small for long traces.
    std::size_t step = std::max<std::size_t>(1, tr.size() / static_cast<std::size_t>(pw));
    for (std::size_t i = 0; i < tr.size(); i += step) {
      double v = tr[i].difference_m;
      for (std::size_t j = i; j < std::min(tr.size(), i + step); ++j) v = std::max(v, tr[j].difference_m);
      s << fixed(x(tr[i].t), 2) << ',' << fixed(y(v), 2) << ' ';
    }
    s << "\"/>\n";
  }
  s << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + pw << "\" y1=\"" << fixed(y(det.threshold), 2) << "\" y2=\""
    << fixed(y(det.threshold), 2) << "\" stroke=\"#c62828\" stroke-dasharray=\"6,4\"/>\n";
  s << "<text x=\"" << kLeft + pw - 150 << "\" y=\"" << fixed(y(det.threshold) - 4, 2)
    << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#c62828\">threshold " << fixed(det.threshold, 4)
    << " m</text>\n";
  if (attack_start_t && *attack_start_t >= t0 && *attack_start_t <= t1) {
    const double xa = x(*attack_start_t);
    s << "<line x1=\"" << fixed(xa, 2) << "\" x2=\"" << fixed(xa, 2) << "\" y1=\"" << kTop << "\" y2=\"" << kTop + ph
      << "\" stroke=\"#444\" stroke-dasharray=\"2,3\"/>\n";
    s << "<text x=\"" << fixed(xa + 4, 2) << "\" y=\"" << kTop + 12
      << "\" font-family=\"sans-serif\" font-size=\"11\">attack start</text>\n";
  }
  s << "<text x=\"" << kLeft + pw / 2 - 40 << "\" y=\"" << kH - 10
    << "\" font-family=\"sans-serif\" font-size=\"11\">time (s), span " << fixed(t1 - t0, 1) << " s</text>\n";
  s << "<text x=\"12\" y=\"" << kTop + ph / 2
    << "\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-90 12 " << kTop + ph / 2
    << ")\">|perceived - predicted| (m)</text>\n";
  s << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
    << "font-size=\"10\">" << fixed(y_max, 3) << "</text>\n";
  s << "<text x=\"" << kLeft - 4 << "\" y=\"" << kTop + ph << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
    << "font-size=\"10\">0</text>\n";
  s << "</svg>\n";
  return s.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path);
}

}  // namespace gnssguard
