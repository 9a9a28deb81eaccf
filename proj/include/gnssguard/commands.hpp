#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gnssguard/fusion_detector.hpp"
#include "gnssguard/shift_predictor.hpp"

namespace gnssguard {

// Command implementations behind the gnssguard tool. Each throws
// gnssguard::Error on failure; exit_code_for maps errors to process codes.

struct SynthArgs {
  std::optional<std::string> route_path;
  std::size_t random_routes = 0;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config_path;
};
std::vector<std::string> cmd_synth(const SynthArgs& args);

struct TemplatesArgs {
  std::optional<std::size_t> count;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string config_path;
};
std::string cmd_templates(const TemplatesArgs& args);

struct InjectArgs {
  std::string clean_csv;
  std::string spec_json;
  std::string out_dir;
};
std::string cmd_inject(const InjectArgs& args);

struct SuiteArgs {
  std::uint64_t seed = 0;
  std::string out_dir;
  std::size_t controls = 10;
  std::string config_path;
};
std::vector<std::string> cmd_suite(const SuiteArgs& args);

struct TrainArgs {
  std::vector<std::string> inputs;  // trajectory CSVs
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<InputMode> mode;
  std::optional<std::string> out_model;
  std::ostream* log = nullptr;
};
struct TrainOutputs {
  std::string model_path;
  std::string loss_path;
  std::string report_path;
  TrainingResult result;
};
TrainOutputs cmd_train(const TrainArgs& args);

struct DetectArgs {
  std::string input;  // trajectory CSV or scenario bundle directory
  std::optional<std::string> model_path;
  std::optional<std::string> templates_path;
  std::string config_path;
  std::optional<std::string> out_path;
};
DetectionResult cmd_detect(const DetectArgs& args, std::ostream& out);

struct EvaluateArgs {
  std::vector<std::string> bundles;
  std::optional<std::string> suite_dir;  // every subdirectory holding a spec.json
  std::optional<std::string> model_path;
  std::optional<std::string> templates_path;
  std::string config_path;
  std::optional<std::string> out_dir;
  bool plot = false;
  bool latency = true;
  std::ostream* log = nullptr;
};
struct EvaluateOutputs {
  std::string out_dir;
  EvaluationResult result;
  std::vector<std::string> failed_bundles;
};
EvaluateOutputs cmd_evaluate(const EvaluateArgs& args);

/// 2 input error, 3 numeric failure, 4 internal invariant violation.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace gnssguard
