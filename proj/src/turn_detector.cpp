#include "gnssguard/turn_detector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "gnssguard/dtw.hpp"
#include "gnssguard/error.hpp"

namespace gnssguard {

using nlohmann::json;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double wrap_degrees(double deg) {
  deg = std::fmod(deg, 360.0);
  if (deg > 180.0) deg -= 360.0;
  if (deg <= -180.0) deg += 360.0;
  return deg;
}

std::vector<double> z_normalized(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (out.empty()) return out;
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  for (double& v : out) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return out;
}

struct Run {
  std::size_t first;
  std::size_t last;
};

}  // namespace

const char* to_string(TurnLabel label) noexcept { return label == TurnLabel::Left ? "Left" : "Right"; }

TurnLabel turn_label_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "left") return TurnLabel::Left;
  if (lower == "right") return TurnLabel::Right;
  throw Error(Errc::InvalidInput, "unknown turn label '" + s + "'");
}

const char* to_string(TurnAlarmReason reason) noexcept {
  switch (reason) {
    case TurnAlarmReason::NoGnssTurn: return "no-gnss-turn";
    case TurnAlarmReason::DirectionContradiction: return "direction-contradiction";
    case TurnAlarmReason::GnssTurnWithoutSteering: return "gnss-turn-without-steering";
  }
  return "unknown";
}

std::vector<TurnSegment> segment_turns(const TimeSeries& steering, const SegmentGate& gate) {
  std::vector<TurnSegment> out;
  const std::size_t n = steering.size();
  if (n == 0) return out;

  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(steering.v[i]) < gate.angle_threshold_deg) continue;
    if (!runs.empty() && runs.back().last + 1 == i)
      runs.back().last = i;
    else
      runs.push_back({i, i});
  }

  std::vector<Run> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && steering.t[r.first] - steering.t[merged.back().last] <= gate.merge_gap_s + 1e-9)
      merged.back().last = r.last;
    else
      merged.push_back(r);
  }

  std::vector<Run> kept;
  for (const auto& r : merged)
    if (steering.t[r.last] - steering.t[r.first] >= gate.min_duration_s - 1e-9) kept.push_back(r);

  for (std::size_t s = 0; s < kept.size(); ++s) {
    const auto& r = kept[s];
    double start = std::max(steering.t.front(), steering.t[r.first] - gate.context_pad_s);
    double end = std::min(steering.t.back(), steering.t[r.last] + gate.context_pad_s);
    if (s > 0) start = std::max(start, 0.5 * (steering.t[kept[s - 1].last] + steering.t[r.first]));
    if (s + 1 < kept.size()) end = std::min(end, 0.5 * (steering.t[r.last] + steering.t[kept[s + 1].first]));
    TurnSegment seg;
    seg.complete = r.first > 0 && r.last + 1 < n;
    for (std::size_t i = 0; i < n; ++i) {
      if (steering.t[i] < start || steering.t[i] > end) continue;
      // Disjointness: a sample exactly on a shared midpoint belongs to the earlier segment.
      if (!out.empty() && steering.t[i] <= out.back().end_t) continue;
      seg.series.t.push_back(steering.t[i]);
      seg.series.v.push_back(steering.v[i]);
    }
    seg.start_t = seg.series.t.front();
    seg.end_t = seg.series.t.back();
    out.push_back(std::move(seg));
  }
  return out;
}

DistanceFn dtw_distance_fn(std::size_t fastdtw_radius, bool z_normalize) {
  return [fastdtw_radius, z_normalize](std::span<const double> a, std::span<const double> b) {
    if (z_normalize) {
      const auto za = z_normalized(a);
      const auto zb = z_normalized(b);
      return fastdtw_radius == 0 ? dtw_exact(za, zb).distance : fastdtw(za, zb, fastdtw_radius).distance;
    }
    return fastdtw_radius == 0 ? dtw_exact(a, b).distance : fastdtw(a, b, fastdtw_radius).distance;
  };
}

TurnVerdict knn_classify(const TurnSegment& segment, std::span<const TurnTemplate> templates, std::size_t k,
                         const DistanceFn& distance) {
  if (k < 1 || templates.size() < k) throw Error(Errc::InsufficientTemplates, "need at least k >= 1 templates");
  const bool has_left = std::any_of(templates.begin(), templates.end(),
                                    [](const TurnTemplate& t) { return t.label == TurnLabel::Left; });
  const bool has_right = std::any_of(templates.begin(), templates.end(),
                                     [](const TurnTemplate& t) { return t.label == TurnLabel::Right; });
  if (!has_left || !has_right) throw Error(Errc::InsufficientTemplates, "template bank must contain both labels");

  std::vector<std::tuple<double, TurnLabel, const std::string*>> scored;
  scored.reserve(templates.size());
  for (const auto& tpl : templates) scored.emplace_back(distance(segment.series.v, tpl.series), tpl.label, &tpl.source_id);
  const auto nearest_first = [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return *std::get<2>(a) < *std::get<2>(b);
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), nearest_first);

  TurnVerdict verdict;
  verdict.segment = segment;
  std::size_t right_votes = 0;
  for (std::size_t i = 0; i < k; ++i) {
    verdict.neighbor_distances.push_back(std::get<0>(scored[i]));
    if (std::get<1>(scored[i]) == TurnLabel::Right) ++right_votes;
  }
  const std::size_t left_votes = k - right_votes;
  if (right_votes == left_votes)
    verdict.label = std::get<1>(scored.front());
  else
    verdict.label = right_votes > left_votes ? TurnLabel::Right : TurnLabel::Left;
  return verdict;
}

std::optional<double> gnss_heading_change(const Trajectory& window, double noise_floor_m) {
  if (window.size() < 3) return std::nullopt;
  std::optional<double> first;
  double last = 0.0;
  GeoPoint anchor = geo_point(window.records.front());
  for (std::size_t i = 1; i < window.size(); ++i) {
    const GeoPoint p = geo_point(window.records[i]);
    if (haversine_distance(anchor, p) < noise_floor_m) continue;
    last = initial_bearing(anchor, p) * kRadToDeg;
    if (!first) first = last;
    anchor = p;
  }
  if (!first) return std::nullopt;
  return wrap_degrees(last - *first);
}

std::optional<TurnAlarm> check_turn_consistency(TurnLabel verdict, std::optional<double> gnss_change_deg,
                                                double turn_threshold_deg) {
  if (!gnss_change_deg || std::abs(*gnss_change_deg) < turn_threshold_deg)
    return TurnAlarm{TurnAlarmReason::NoGnssTurn};
  const bool gnss_right = *gnss_change_deg > 0.0;
  if (gnss_right != (verdict == TurnLabel::Right)) return TurnAlarm{TurnAlarmReason::DirectionContradiction};
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<double> synthesize_turn_curve(TurnLabel label, Rng& rng, const TemplateSynthesis& p) {
  const double sign = label == TurnLabel::Right ? 1.0 : -1.0;
  const double amplitude = rng.uniform(p.amplitude_min_deg, p.amplitude_max_deg);
  const double duration =
      rng.uniform(p.duration_min_s, p.duration_max_s) * (1.0 + rng.uniform(-p.duration_jitter, p.duration_jitter));
  const double correction = 0.3 * duration;
  const double pad = 1.0;
  const double total = pad + duration + correction + pad;
  const auto n = static_cast<std::size_t>(std::floor(total * kTurnSampleHz)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kTurnSampleHz - pad;
    double v = 0.0;
    if (t >= 0.0 && t < duration) {
      const double s = std::sin(std::numbers::pi * t / duration);
      v = amplitude * s * s;
    } else if (t >= duration && t < duration + correction) {
      const double s = std::sin(std::numbers::pi * (t - duration) / correction);
      v = -p.correction_ratio * amplitude * s * s;
    }
    out[i] = sign * v + rng.normal(0.0, p.noise_sigma_deg);
  }
  return out;
}

std::vector<TurnTemplate> synthesize_template_bank(std::size_t count, std::uint64_t seed, const TemplateSynthesis& params) {
  Rng rng(seed);
  std::vector<TurnTemplate> bank;
  bank.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const TurnLabel label = i % 2 == 0 ? TurnLabel::Right : TurnLabel::Left;
    std::ostringstream id;
    id << "synthetic-" << seed << '-' << i;
    bank.push_back({label, synthesize_turn_curve(label, rng, params), id.str()});
  }
  return bank;
}

std::vector<TurnTemplate> parse_template_bank(const std::string& json_text, bool resample_to_5hz) {
  std::vector<TurnTemplate> bank;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_array()) throw Error(Errc::InvalidInput, "template bank must be a JSON array");
    for (const auto& entry : doc) {
      TurnTemplate tpl;
      tpl.label = turn_label_from_string(entry.at("label").get<std::string>());
      tpl.source_id = entry.value("source_id", std::string{});
      auto values = entry.at("values").get<std::vector<double>>();
      const double hz = entry.at("hz").get<double>();
      if (hz != kTurnSampleHz) {
        if (!resample_to_5hz)
          throw Error(Errc::InvalidInput, "template '" + tpl.source_id + "' sampled at " + std::to_string(hz) +
                                              " Hz; pass the resample flag to accept it");
        TimeSeries ts;
        for (std::size_t i = 0; i < values.size(); ++i) {
          ts.t.push_back(static_cast<double>(i) / hz);
          ts.v.push_back(values[i]);
        }
        values = resample(ts, kTurnSampleHz).v;
      }
      if (values.size() < 5) throw Error(Errc::InvalidInput, "template '" + tpl.source_id + "' shorter than 5 samples");
      tpl.series = std::move(values);
      bank.push_back(std::move(tpl));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("malformed template bank: ") + e.what());
  }
  return bank;
}

std::vector<TurnTemplate> load_template_bank(const std::string& path, bool resample_to_5hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open template bank '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_template_bank(buf.str(), resample_to_5hz);
}

std::string template_bank_to_json(std::span<const TurnTemplate> bank) {
  json doc = json::array();
  for (const auto& tpl : bank)
    doc.push_back({{"label", to_string(tpl.label)}, {"hz", kTurnSampleHz}, {"values", tpl.series}, {"source_id", tpl.source_id}});
  return doc.dump(1);
}

void save_template_bank(const std::string& path, std::span<const TurnTemplate> bank) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  out << template_bank_to_json(bank) << '\n';
}

}  // namespace gnssguard
