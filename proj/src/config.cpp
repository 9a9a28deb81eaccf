#include "gnssguard/config.hpp"

#include <cstdlib>
#include <fstream>
#include <initializer_list>

#include "gnssguard/error.hpp"

namespace gnssguard {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const char* section, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(Errc::InvalidConfig, std::string(section) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw Error(Errc::InvalidConfig, std::string("unknown key '") + key + "' in " + section);
  }
}

template <class T>
void read(const json& obj, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::InvalidConfig, std::string("config field '") + key + "' has the wrong type");
  }
}

void read_optional(const json& obj, const char* key, std::optional<double>& dst) {
  if (!obj.contains(key)) return;
  if (obj.at(key).is_null()) {
    dst.reset();
    return;
  }
  double v = 0.0;
  read(obj, key, v);
  dst = v;
}

}  // namespace

void GlobalConfig::validate() const {
  training.validate();
  detector.validate();
  if (!(synthesis.rate_hz > 0.0)) throw Error(Errc::InvalidConfig, "synthesis.rate_hz must be positive");
  if (!(synthesis.noise.gnss_sigma_m >= 0.0) || !(synthesis.noise.speed_sigma_ftps >= 0.0))
    throw Error(Errc::InvalidConfig, "synthesis noise must be non-negative");
  if (synthesis.corpus_routes == 0) throw Error(Errc::InvalidConfig, "synthesis.corpus_routes must be positive");
  if (synthesis.template_count < 2) throw Error(Errc::InvalidConfig, "synthesis.template_count must be >= 2");
}

GlobalConfig config_from_json(const json& doc) {
  GlobalConfig c;
  check_keys(doc, "config", {"training", "gnss_positioning_error_m", "detector", "turn_gate", "motion", "synthesis", "paths"});

  if (doc.contains("training")) {
    const auto& t = doc.at("training");
    check_keys(t, "training", {"neurons_layer1", "neurons_layer2", "epochs", "batch_size", "learning_rate", "beta1",
                               "beta2", "epsilon", "window_len", "seed", "validation_fraction", "mode"});
    auto& tc = c.training;
    read(t, "neurons_layer1", tc.neurons_layer1);
    read(t, "neurons_layer2", tc.neurons_layer2);
    read(t, "epochs", tc.epochs);
    read(t, "batch_size", tc.batch_size);
    read(t, "learning_rate", tc.learning_rate);
    read(t, "beta1", tc.beta1);
    read(t, "beta2", tc.beta2);
    read(t, "epsilon", tc.epsilon);
    read(t, "window_len", tc.window_len);
    read(t, "seed", tc.seed);
    read(t, "validation_fraction", tc.validation_fraction);
    if (t.contains("mode")) {
      std::string mode;
      read(t, "mode", mode);
      try {
        tc.mode = input_mode_from_string(mode);
      } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.what());
      }
    }
  }
  read(doc, "gnss_positioning_error_m", c.training.gnss_positioning_error_m);

  if (doc.contains("detector")) {
    const auto& d = doc.at("detector");
    check_keys(d, "detector", {"k", "fastdtw_radius", "z_normalize", "gnss_turn_threshold_deg", "heading_noise_floor_m",
                               "turn_scan_window_s", "turn_scan_hop_s", "turn_scan_floor_m", "threshold_override"});
    auto& dc = c.detector;
    read(d, "k", dc.k);
    read(d, "fastdtw_radius", dc.fastdtw_radius);
    read(d, "z_normalize", dc.z_normalize);
    read(d, "gnss_turn_threshold_deg", dc.gnss_turn_threshold_deg);
    read(d, "heading_noise_floor_m", dc.heading_noise_floor_m);
    read(d, "turn_scan_window_s", dc.turn_scan_window_s);
    read(d, "turn_scan_hop_s", dc.turn_scan_hop_s);
    read(d, "turn_scan_floor_m", dc.turn_scan_floor_m);
    read_optional(d, "threshold_override", dc.threshold_override);
  }
  if (doc.contains("turn_gate")) {
    const auto& g = doc.at("turn_gate");
    check_keys(g, "turn_gate", {"angle_threshold_deg", "min_duration_s", "merge_gap_s", "context_pad_s"});
    auto& gc = c.detector.gate;
    read(g, "angle_threshold_deg", gc.angle_threshold_deg);
    read(g, "min_duration_s", gc.min_duration_s);
    read(g, "merge_gap_s", gc.merge_gap_s);
    read(g, "context_pad_s", gc.context_pad_s);
  }
  if (doc.contains("motion")) {
    const auto& m = doc.at("motion");
    check_keys(m, "motion", {"standstill_speed_mps", "window_s", "hop_s", "gnss_motion_floor_m"});
    auto& mc = c.detector.motion;
    read(m, "standstill_speed_mps", mc.standstill_speed_mps);
    read(m, "window_s", mc.window_s);
    read(m, "hop_s", mc.hop_s);
    read_optional(m, "gnss_motion_floor_m", mc.gnss_motion_floor_m);
  }
  if (doc.contains("synthesis")) {
    const auto& s = doc.at("synthesis");
    check_keys(s, "synthesis", {"rate_hz", "gnss_sigma_m", "gnss_correlation_s", "speed_sigma_ftps", "corpus_routes",
                                "template_count"});
    auto& sc = c.synthesis;
    read(s, "rate_hz", sc.rate_hz);
    read(s, "gnss_sigma_m", sc.noise.gnss_sigma_m);
    read(s, "gnss_correlation_s", sc.noise.gnss_correlation_s);
    read(s, "speed_sigma_ftps", sc.noise.speed_sigma_ftps);
    read(s, "corpus_routes", sc.corpus_routes);
    read(s, "template_count", sc.template_count);
  }
  if (doc.contains("paths")) {
    const auto& p = doc.at("paths");
    check_keys(p, "paths", {"model", "templates", "out"});
    read(p, "model", c.paths.model);
    read(p, "templates", c.paths.templates);
    read(p, "out", c.paths.out);
  }
  c.validate();
  return c;
}

json config_to_json(const GlobalConfig& c) {
  const auto& t = c.training;
  const auto& d = c.detector;
  const auto& m = d.motion;
  return {
      {"training",
       {{"neurons_layer1", t.neurons_layer1},
        {"neurons_layer2", t.neurons_layer2},
        {"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"epsilon", t.epsilon},
        {"window_len", t.window_len},
        {"seed", t.seed},
        {"validation_fraction", t.validation_fraction},
        {"mode", to_string(t.mode)}}},
      {"gnss_positioning_error_m", t.gnss_positioning_error_m},
      {"detector",
       {{"k", d.k},
        {"fastdtw_radius", d.fastdtw_radius},
        {"z_normalize", d.z_normalize},
        {"gnss_turn_threshold_deg", d.gnss_turn_threshold_deg},
        {"heading_noise_floor_m", d.heading_noise_floor_m},
        {"turn_scan_window_s", d.turn_scan_window_s},
        {"turn_scan_hop_s", d.turn_scan_hop_s},
        {"turn_scan_floor_m", d.turn_scan_floor_m},
        {"threshold_override", d.threshold_override ? json(*d.threshold_override) : json(nullptr)}}},
      {"turn_gate",
       {{"angle_threshold_deg", d.gate.angle_threshold_deg},
        {"min_duration_s", d.gate.min_duration_s},
        {"merge_gap_s", d.gate.merge_gap_s},
        {"context_pad_s", d.gate.context_pad_s}}},
      {"motion",
       {{"standstill_speed_mps", m.standstill_speed_mps},
        {"window_s", m.window_s},
        {"hop_s", m.hop_s},
        {"gnss_motion_floor_m", m.gnss_motion_floor_m ? json(*m.gnss_motion_floor_m) : json(nullptr)}}},
      {"synthesis",
       {{"rate_hz", c.synthesis.rate_hz},
        {"gnss_sigma_m", c.synthesis.noise.gnss_sigma_m},
        {"gnss_correlation_s", c.synthesis.noise.gnss_correlation_s},
        {"speed_sigma_ftps", c.synthesis.noise.speed_sigma_ftps},
        {"corpus_routes", c.synthesis.corpus_routes},
        {"template_count", c.synthesis.template_count}}},
      {"paths", {{"model", c.paths.model}, {"templates", c.paths.templates}, {"out", c.paths.out}}}};
}

void apply_env_overrides(GlobalConfig& cfg) {
  if (const char* v = std::getenv("GNSSGUARD_MODEL"); v && *v) cfg.paths.model = v;
  if (const char* v = std::getenv("GNSSGUARD_TEMPLATES"); v && *v) cfg.paths.templates = v;
  if (const char* v = std::getenv("GNSSGUARD_OUT"); v && *v) cfg.paths.out = v;
}

GlobalConfig load_config(const std::string& path) {
  GlobalConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open config " + path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(Errc::Parse, "config " + path + ": " + e.what());
    }
    cfg = config_from_json(doc);
  }
  apply_env_overrides(cfg);
  cfg.validate();
  return cfg;
}

}  // namespace gnssguard
