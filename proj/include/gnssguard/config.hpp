#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"

#include "gnssguard/attack_forge.hpp"
#include "gnssguard/fusion_detector.hpp"
#include "gnssguard/shift_predictor.hpp"

namespace gnssguard {

struct SynthesisConfig {
  double rate_hz = 120.0;
  NoiseModel noise;
  std::size_t corpus_routes = 10;
  std::size_t template_count = 40;
};

struct PathConfig {
  std::string model = "model.json";
  std::string templates = "templates.json";
  std::string out = "out";
};

struct GlobalConfig {
  TrainingConfig training;
  DetectorConfig detector;
  SynthesisConfig synthesis;
  PathConfig paths;

  void validate() const;
};

/// Strict: unknown keys are rejected so typos do not silently fall back to
/// defaults. Missing keys keep their defaults.
GlobalConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const GlobalConfig& cfg);

/// Reads `path` (empty = defaults), then applies GNSSGUARD_MODEL,
/// GNSSGUARD_TEMPLATES and GNSSGUARD_OUT to the path entries.
GlobalConfig load_config(const std::string& path);
void apply_env_overrides(GlobalConfig& cfg);

}  // namespace gnssguard
