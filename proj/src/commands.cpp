#include "gnssguard/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "gnssguard/attack_forge.hpp"
#include "gnssguard/config.hpp"
#include "gnssguard/error.hpp"
#include "gnssguard/report.hpp"
#include "gnssguard/turn_detector.hpp"

namespace gnssguard {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, path + ": " + e.what());
  }
}

std::string two_digit(std::size_t i) { return (i < 10 ? "0" : "") + std::to_string(i); }

bool is_bundle(const fs::path& p) { return fs::is_directory(p) && fs::exists(p / "spec.json"); }

}  // namespace

std::vector<std::string> cmd_synth(const SynthArgs& args) {
  const GlobalConfig cfg = load_config(args.config_path);
  if (args.out_dir.empty()) throw Error(Errc::InvalidInput, "--out is required");
  if (!args.route_path && args.random_routes == 0)
    throw Error(Errc::InvalidInput, "give --route or --random-routes");
  ensure_dir(args.out_dir);
  std::vector<std::string> written;
  if (args.route_path) {
    const Route route = load_route(*args.route_path);
    const Trajectory traj = generate_synthetic_trajectory(route, cfg.synthesis.rate_hz, cfg.synthesis.noise, args.seed);
    const auto path = (fs::path(args.out_dir) / (fs::path(*args.route_path).stem().string() + ".csv")).string();
    write_trajectory_csv(path, traj);
    written.push_back(path);
  }
  if (args.random_routes > 0) {
    const auto corpus = synthesize_corpus(args.random_routes, args.seed, cfg.synthesis.rate_hz, cfg.synthesis.noise);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto path = (fs::path(args.out_dir) / ("route_" + two_digit(i) + ".csv")).string();
      write_trajectory_csv(path, corpus[i]);
      written.push_back(path);
    }
  }
  return written;
}

std::string cmd_templates(const TemplatesArgs& args) {
  const GlobalConfig cfg = load_config(args.config_path);
  const std::string path = args.out_path.empty() ? cfg.paths.templates : args.out_path;
  const auto bank = synthesize_template_bank(args.count.value_or(cfg.synthesis.template_count), args.seed);
  if (fs::path(path).has_parent_path()) ensure_dir(fs::path(path).parent_path());
  save_template_bank(path, bank);
  return path;
}

std::string cmd_inject(const InjectArgs& args) {
  if (args.out_dir.empty()) throw Error(Errc::InvalidInput, "--out is required");
  const Trajectory clean = read_trajectory_csv(args.clean_csv);
  const json spec_doc = read_json(args.spec_json);
  AttackScenario sc = inject(clean, attack_spec_from_json(spec_doc));
  sc.id = spec_doc.value("id", fs::path(args.out_dir).filename().string());
  write_bundle(args.out_dir, sc);
  return args.out_dir;
}

std::vector<std::string> cmd_suite(const SuiteArgs& args) {
  const GlobalConfig cfg = load_config(args.config_path);
  const std::string out = args.out_dir.empty() ? cfg.paths.out : args.out_dir;
  std::vector<AttackScenario> all = default_scenario_suite(args.seed, cfg.synthesis.rate_hz, cfg.synthesis.noise);
  auto controls = clean_control_suite(args.controls, args.seed, cfg.synthesis.rate_hz, cfg.synthesis.noise);
  std::move(controls.begin(), controls.end(), std::back_inserter(all));
  std::vector<std::string> written;
  for (const auto& sc : all) {
    const auto dir = (fs::path(out) / sc.id).string();
    write_bundle(dir, sc);
    written.push_back(dir);
  }
  return written;
}

TrainOutputs cmd_train(const TrainArgs& args) {
  GlobalConfig cfg = load_config(args.config_path);
  if (args.inputs.empty()) throw Error(Errc::InvalidInput, "no training trajectories given");
  if (args.seed) cfg.training.seed = *args.seed;
  if (args.epochs) cfg.training.epochs = *args.epochs;
  if (args.mode) cfg.training.mode = *args.mode;
  cfg.training.validate();

  std::vector<Trajectory> trajectories;
  for (const auto& p : args.inputs) trajectories.push_back(read_trajectory_csv(p));

  TrainingConfig tc = cfg.training;
  if (args.log) {
    std::ostream& log = *args.log;
    tc.on_epoch = [&log, total = tc.epochs](std::size_t epoch, double train_loss, double val_loss) {
      log << "epoch " << epoch + 1 << '/' << total << " train " << format_double(train_loss) << " validation "
          << format_double(val_loss) << '\n';
    };
  }

  TrainOutputs out;
  out.result = train_on_trajectories(trajectories, tc);
  out.model_path = args.out_model.value_or(cfg.paths.model);
  const fs::path model_path(out.model_path);
  if (model_path.has_parent_path()) ensure_dir(model_path.parent_path());
  save_model(out.model_path, out.result.model);

  const fs::path stem = model_path.parent_path() / model_path.stem();
  out.loss_path = stem.string() + "_loss.csv";
  std::ostringstream loss;
  loss << "epoch,train_loss,validation_loss\n";
  const auto& rep = out.result.report;
  for (std::size_t e = 0; e < rep.train_loss.size(); ++e)
    loss << e + 1 << ',' << format_double(rep.train_loss[e]) << ',' << format_double(rep.validation_loss[e]) << '\n';
  write_text_file(out.loss_path, loss.str());

  out.report_path = stem.string() + "_report.json";
  const auto& m = out.result.model;
  const json report = {{"train_samples", rep.train_samples},
                       {"validation_samples", rep.validation_samples},
                       {"epochs", tc.epochs},
                       {"seed", tc.seed},
                       {"mode", to_string(tc.mode)},
                       {"validation_rmse_m", m.rmse},
                       {"validation_max_abs_error_m", m.max_abs_error},
                       {"error_threshold_m", m.error_threshold}};
  write_text_file(out.report_path, report.dump(2) + "\n");
  return out;
}

DetectionResult cmd_detect(const DetectArgs& args, std::ostream& out) {
  const GlobalConfig cfg = load_config(args.config_path);
  const PredictionModel model = load_model(args.model_path.value_or(cfg.paths.model));
  const auto templates = load_template_bank(args.templates_path.value_or(cfg.paths.templates));
  const fs::path in(args.input);
  const Trajectory traj = is_bundle(in) ? read_bundle(args.input).spoofed : read_trajectory_csv(args.input);
  DetectionResult det = run_detection(traj, model, templates, cfg.detector);
  const std::string text = detection_to_json(det).dump(2) + "\n";
  if (args.out_path)
    write_text_file(*args.out_path, text);
  else
    out << text;
  return det;
}

EvaluateOutputs cmd_evaluate(const EvaluateArgs& args) {
  const GlobalConfig cfg = load_config(args.config_path);
  const PredictionModel model = load_model(args.model_path.value_or(cfg.paths.model));
  const auto templates = load_template_bank(args.templates_path.value_or(cfg.paths.templates));

  std::vector<std::string> dirs = args.bundles;
  if (args.suite_dir) {
    if (!fs::is_directory(*args.suite_dir)) throw Error(Errc::Io, "suite directory not found: " + *args.suite_dir);
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(*args.suite_dir))
      if (is_bundle(entry.path())) found.push_back(entry.path().string());
    std::sort(found.begin(), found.end());
    dirs.insert(dirs.end(), found.begin(), found.end());
  }
  if (dirs.empty()) throw Error(Errc::InvalidInput, "no scenario bundles given");

  EvaluateOutputs out;
  std::vector<AttackScenario> scenarios;
  for (const auto& d : dirs) {
    try {
      scenarios.push_back(read_bundle(d));
    } catch (const Error& e) {
      out.failed_bundles.push_back(d + ": " + e.what());
      if (args.log) *args.log << "skipping bundle " << d << ": " << e.what() << '\n';
    }
  }
  if (scenarios.empty()) throw Error(Errc::InvalidInput, "no readable scenario bundles");

  EvaluationOptions opts;
  opts.measure_latency = args.latency;
  opts.keep_detections = args.plot;
  out.result = evaluate_scenarios(scenarios, model, templates, cfg.detector, opts);

  out.out_dir = args.out_dir.value_or(cfg.paths.out);
  ensure_dir(out.out_dir);
  const fs::path root(out.out_dir);
  json failed = json::array();
  for (const auto& f : out.failed_bundles) failed.push_back(f);
  const json reports = {{"threshold_m", cfg.detector.threshold_override.value_or(model.error_threshold)},
                        {"reports", reports_to_json(out.result.reports)},
                        {"failed_bundles", failed}};
  write_text_file((root / "reports.json").string(), reports.dump(2) + "\n");
  write_text_file((root / "summary.csv").string(), summary_to_csv(out.result.summary));
  if (args.latency) write_text_file((root / "latency.json").string(), latency_to_json(out.result.reports).dump(2) + "\n");
  if (args.plot) {
    ensure_dir(root / "plots");
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      const auto& sc = scenarios[i];
      const std::optional<double> start =
          sc.ground_truth ? std::optional<double>(sc.ground_truth->start_t) : std::nullopt;
      write_text_file((root / "plots" / (sc.id + ".svg")).string(),
                      render_shift_plot_svg(out.result.detections[i], start, sc.id));
    }
  }
  return out;
}

int exit_code_for(const std::exception& e) noexcept {
  if (const auto* ge = dynamic_cast<const Error*>(&e)) {
    switch (ge->code()) {
      case Errc::Diverged: return 3;
      case Errc::DimensionMismatch:
      case Errc::Invariant: return 4;
      default: return 2;
    }
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
  return 4;
}

}  // namespace gnssguard
