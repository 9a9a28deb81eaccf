#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "gnssguard/config.hpp"
#include "gnssguard/error.hpp"

using namespace gnssguard;
using nlohmann::json;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Invariant;
}

}  // namespace

TEST_CASE("defaults") {
  const GlobalConfig c = config_from_json(json::object());
  CHECK(c.training.neurons_layer1 == 128);
  CHECK(c.training.neurons_layer2 == 64);
  CHECK(c.training.epochs == 500);
  CHECK(c.training.batch_size == 50);
  CHECK(c.training.learning_rate == 0.01);
  CHECK(c.training.window_len == 10);
  CHECK(c.training.gnss_positioning_error_m == 0.1);
  CHECK(c.detector.gate.angle_threshold_deg == 90.0);
  CHECK(c.detector.k == 1);
  CHECK(c.detector.motion.standstill_speed_mps == 0.05);
  CHECK(c.detector.motion.window_s == 1.0);
  CHECK_FALSE(c.detector.threshold_override.has_value());
}

TEST_CASE("round trip through JSON") {
  GlobalConfig c;
  c.training.epochs = 7;
  c.training.mode = InputMode::Hardened;
  c.detector.k = 3;
  c.detector.threshold_override = 0.2;
  c.detector.motion.gnss_motion_floor_m = 0.3;
  c.synthesis.noise.gnss_sigma_m = 0.05;
  c.paths.model = "m.json";
  const GlobalConfig back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.training.mode == InputMode::Hardened);
  CHECK(*back.detector.threshold_override == 0.2);
}

TEST_CASE("strict parsing") {
  CHECK(code_of([] { config_from_json(json::parse(R"({"trainig": {}})")); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json::parse(R"({"training": {"epoch": 3}})")); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json::parse(R"({"training": {"epochs": "many"}})")); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json::parse(R"({"training": {"mode": "fast"}})")); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json::parse(R"({"training": {"learning_rate": -1}})")); }) ==
        Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json::parse(R"({"detector": {"k": 0}})")); }) == Errc::InvalidConfig);
  CHECK(code_of([] { config_from_json(json::parse("[]")); }) == Errc::InvalidConfig);
  CHECK(config_from_json(json::parse(R"({"gnss_positioning_error_m": 0.05})")).training.gnss_positioning_error_m == 0.05);
}

TEST_CASE("load_config: file, parse errors and environment overrides") {
  const auto dir = std::filesystem::temp_directory_path() / "gnssguard_test_config";
  std::filesystem::create_directories(dir);
  const auto good = (dir / "good.json").string();
  const auto bad = (dir / "bad.json").string();
  std::ofstream(good) << R"({"paths": {"model": "from_file.json"}, "training": {"epochs": 3}})";
  std::ofstream(bad) << "{ not json";

  ::unsetenv("GNSSGUARD_MODEL");
  CHECK(load_config(good).paths.model == "from_file.json");
  CHECK(load_config(good).training.epochs == 3);
  CHECK(load_config("").paths.model == "model.json");
  CHECK(code_of([&] { load_config(bad); }) == Errc::Parse);
  CHECK(code_of([&] { load_config((dir / "missing.json").string()); }) == Errc::Io);

  ::setenv("GNSSGUARD_MODEL", "from_env.json", 1);
  ::setenv("GNSSGUARD_OUT", "env_out", 1);
  const auto c = load_config(good);
  CHECK(c.paths.model == "from_env.json");
  CHECK(c.paths.out == "env_out");
  ::unsetenv("GNSSGUARD_MODEL");
  ::unsetenv("GNSSGUARD_OUT");
  std::filesystem::remove_all(dir);
}
