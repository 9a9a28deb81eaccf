#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gnssguard/commands.hpp"
#include "gnssguard/error.hpp"

using namespace gnssguard;

namespace {

template <class T>
std::optional<T> opt_if(const CLI::Option* o, const T& v) {
  return o->count() ? std::optional<T>(v) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GNSS spoofing detection from in-vehicle sensors"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic trajectories");
  SynthArgs synth_args;
  std::string route;
  auto* route_opt = synth->add_option("--route", route, "route JSON file");
  synth->add_option("--random-routes", synth_args.random_routes, "number of random routes");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();

  // templates
  auto* templates = app.add_subcommand("templates", "Synthesize a turn template bank");
  TemplatesArgs tmpl_args;
  std::size_t tmpl_count = 0;
  auto* count_opt = templates->add_option("--count", tmpl_count, "number of templates");
  templates->add_option("--seed", tmpl_args.seed, "random seed");
  templates->add_option("--out", tmpl_args.out_path, "output JSON path");

  // inject
  auto* injectc = app.add_subcommand("inject", "Inject one attack into a clean trajectory");
  InjectArgs inject_args;
  injectc->add_option("--clean", inject_args.clean_csv, "clean trajectory CSV")->required();
  injectc->add_option("--spec", inject_args.spec_json, "attack spec JSON")->required();
  injectc->add_option("--out", inject_args.out_dir, "bundle directory")->required();

  // suite
  auto* suite = app.add_subcommand("suite", "Write the default attack suite plus clean controls");
  SuiteArgs suite_args;
  suite->add_option("--seed", suite_args.seed, "random seed");
  suite->add_option("--out", suite_args.out_dir, "output directory");
  suite->add_option("--controls", suite_args.controls, "number of clean controls");

  // train
  auto* trainc = app.add_subcommand("train", "Train the shift predictor");
  TrainArgs train_args;
  std::uint64_t train_seed = 0;
  std::size_t epochs = 0;
  std::string mode, train_out;
  trainc->add_option("inputs", train_args.inputs, "trajectory CSVs")->required();
  auto* train_seed_opt = trainc->add_option("--seed", train_seed, "random seed");
  auto* epochs_opt = trainc->add_option("--epochs", epochs, "override the epoch count");
  auto* mode_opt = trainc->add_option("--mode", mode, "input mode")->check(CLI::IsMember({"paper-faithful", "hardened"}));
  auto* train_out_opt = trainc->add_option("--out", train_out, "model JSON path");
  bool quiet = false;
  trainc->add_flag("--quiet", quiet, "no per-epoch progress");

  // detect
  auto* detect = app.add_subcommand("detect", "Run all strategies over one trajectory");
  DetectArgs detect_args;
  std::string det_model, det_templates, det_out;
  detect->add_option("input", detect_args.input, "trajectory CSV or scenario bundle")->required();
  auto* det_model_opt = detect->add_option("--model", det_model, "model JSON");
  auto* det_tmpl_opt = detect->add_option("--templates", det_templates, "template bank JSON");
  auto* det_out_opt = detect->add_option("--out", det_out, "alarm JSON path (default stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate scenario bundles");
  EvaluateArgs eval_args;
  std::string ev_suite, ev_model, ev_templates, ev_out;
  evaluate->add_option("bundles", eval_args.bundles, "scenario bundle directories");
  auto* ev_suite_opt = evaluate->add_option("--suite", ev_suite, "directory of bundles");
  auto* ev_model_opt = evaluate->add_option("--model", ev_model, "model JSON");
  auto* ev_tmpl_opt = evaluate->add_option("--templates", ev_templates, "template bank JSON");
  auto* ev_out_opt = evaluate->add_option("--out", ev_out, "output directory");
  evaluate->add_flag("--plot", eval_args.plot, "write one SVG per scenario");
  bool no_latency = false;
  evaluate->add_flag("--no-latency", no_latency, "skip latency measurement");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      synth_args.route_path = opt_if(route_opt, route);
      synth_args.config_path = config_path;
      for (const auto& p : cmd_synth(synth_args)) std::cout << p << '\n';
    } else if (templates->parsed()) {
      tmpl_args.count = opt_if(count_opt, tmpl_count);
      tmpl_args.config_path = config_path;
      std::cout << cmd_templates(tmpl_args) << '\n';
    } else if (injectc->parsed()) {
      std::cout << cmd_inject(inject_args) << '\n';
    } else if (suite->parsed()) {
      suite_args.config_path = config_path;
      for (const auto& p : cmd_suite(suite_args)) std::cout << p << '\n';
    } else if (trainc->parsed()) {
      train_args.config_path = config_path;
      train_args.seed = opt_if(train_seed_opt, train_seed);
      train_args.epochs = opt_if(epochs_opt, epochs);
      if (mode_opt->count()) train_args.mode = input_mode_from_string(mode);
      train_args.out_model = opt_if(train_out_opt, train_out);
      if (!quiet) train_args.log = &std::cerr;
      const auto out = cmd_train(train_args);
      const auto& m = out.result.model;
      std::cout << "model " << out.model_path << "\nrmse_m " << m.rmse << "\nmax_abs_error_m " << m.max_abs_error
                << "\nerror_threshold_m " << m.error_threshold << '\n';
    } else if (detect->parsed()) {
      detect_args.config_path = config_path;
      detect_args.model_path = opt_if(det_model_opt, det_model);
      detect_args.templates_path = opt_if(det_tmpl_opt, det_templates);
      detect_args.out_path = opt_if(det_out_opt, det_out);
      cmd_detect(detect_args, std::cout);
    } else if (evaluate->parsed()) {
      eval_args.config_path = config_path;
      eval_args.suite_dir = opt_if(ev_suite_opt, ev_suite);
      eval_args.model_path = opt_if(ev_model_opt, ev_model);
      eval_args.templates_path = opt_if(ev_tmpl_opt, ev_templates);
      eval_args.out_dir = opt_if(ev_out_opt, ev_out);
      eval_args.latency = !no_latency;
      eval_args.log = &std::cerr;
      const auto out = cmd_evaluate(eval_args);
      std::cout << "reports written to " << out.out_dir << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "gnssguard: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
