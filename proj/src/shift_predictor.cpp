#include "gnssguard/shift_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include "gnssguard/error.hpp"

namespace gnssguard {

using nlohmann::json;

namespace {

constexpr const char* kFeatureNames[kFeatureCount] = {"shift", "accel_pct", "steer_deg", "speed"};

SequenceBatch assemble_batch(std::span<const ShiftSample> samples, std::span<const std::size_t> indices,
                             std::size_t window_len) {
  const auto batch = static_cast<Eigen::Index>(indices.size());
  SequenceBatch steps(window_len, Eigen::MatrixXd(kFeatureCount, batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& w = samples[indices[static_cast<std::size_t>(b)]].window;
    for (std::size_t t = 0; t < window_len; ++t) steps[t].col(b) = w.row(static_cast<Eigen::Index>(t)).transpose();
  }
  return steps;
}

Eigen::RowVectorXd normalized_targets(std::span<const ShiftSample> samples, std::span<const std::size_t> indices,
                                      const FeatureRange& range) {
  Eigen::RowVectorXd y(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t b = 0; b < indices.size(); ++b)
    y(static_cast<Eigen::Index>(b)) = range.normalize(samples[indices[b]].target);
  return y;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json flat = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  return flat;
}

Eigen::MatrixXd matrix_from_json(const json& flat, Eigen::Index rows, Eigen::Index cols) {
  if (!flat.is_array() || static_cast<Eigen::Index>(flat.size()) != rows * cols)
    throw Error(Errc::DimensionMismatch, "weight array length does not match declared dims");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat.at(k++).get<double>();
  return m;
}

}  // namespace

const char* to_string(InputMode mode) noexcept {
  return mode == InputMode::PaperFaithful ? "paper-faithful" : "hardened";
}

InputMode input_mode_from_string(const std::string& s) {
  if (s == "paper-faithful") return InputMode::PaperFaithful;
  if (s == "hardened") return InputMode::Hardened;
  throw Error(Errc::InvalidConfig, "unknown input mode '" + s + "'");
}

void TrainingConfig::validate() const {
  if (neurons_layer1 < 1 || neurons_layer2 < 1 || epochs < 1 || batch_size < 1 || window_len < 1)
    throw Error(Errc::InvalidConfig, "training counts must all be >= 1");
  if (!(learning_rate > 0.0)) throw Error(Errc::InvalidConfig, "learning_rate must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw Error(Errc::InvalidConfig, "validation_fraction must lie in (0, 1)");
  if (!(gnss_positioning_error_m >= 0.0)) throw Error(Errc::InvalidConfig, "gnss_positioning_error_m must be >= 0");
}

double PredictionModel::predict(const Eigen::MatrixXd& window) const {
  return norm.shift().denormalize(lstm_forward(weights, window));
}

std::vector<double> PredictionModel::predict(std::span<const ShiftSample> samples, std::size_t chunk) const {
  std::vector<double> out;
  out.reserve(samples.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < samples.size(); start += chunk) {
    const std::size_t stop = std::min(samples.size(), start + chunk);
    idx.resize(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const auto y = lstm_forward_batch(weights, assemble_batch(samples, idx, window_len));
    for (Eigen::Index b = 0; b < y.size(); ++b) out.push_back(norm.shift().denormalize(y(b)));
  }
  return out;
}

// ---------------------------------------------------------------------------

double shift_feature(const Trajectory& traj, std::span<const double> shifts, std::size_t k, InputMode mode) {
  if (mode == InputMode::PaperFaithful) return shifts[k - 1];
  const auto& a = traj.records[k - 1];
  const auto& b = traj.records[k];
  return 0.5 * (a.speed + b.speed) * kFeetToMeters * (b.t - a.t);
}

FeatureSeries collect_features(const Trajectory& traj, InputMode mode, std::size_t begin, std::size_t end) {
  FeatureSeries fs;
  if (traj.size() < 2) return fs;
  const auto shifts = compute_location_shifts(traj);
  end = std::min(end, traj.size());
  for (std::size_t k = std::max<std::size_t>(begin, 1); k < end; ++k) {
    const auto& r = traj.records[k];
    fs.series[kShift].push_back(shifts[k - 1]);
    if (mode == InputMode::Hardened) fs.series[kShift].push_back(shift_feature(traj, shifts, k, mode));
    fs.series[kAccel].push_back(r.accel_pct);
    fs.series[kSteer].push_back(r.steer_deg);
    fs.series[kSpeed].push_back(r.speed);
  }
  return fs;
}

std::vector<ShiftSample> build_supervised_dataset(const Trajectory& traj, const NormalizationParams& norm,
                                                  std::size_t window_len, InputMode mode) {
  if (window_len < 1) throw Error(Errc::InvalidInput, "window_len must be >= 1");
  if (traj.size() < window_len + 2) throw Error(Errc::TooShort, "trajectory shorter than window_len + 2 records");
  const auto shifts = compute_location_shifts(traj);
  const std::size_t n = traj.size();

  // Normalized feature row for each record k >= 1.
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(kFeatureCount));
  rows.row(0).setZero();
  for (std::size_t k = 1; k < n; ++k) {
    const auto& r = traj.records[k];
    const FeatureVector raw{shift_feature(traj, shifts, k, mode), r.accel_pct, r.steer_deg, r.speed};
    const auto f = apply_normalization(norm, raw);
    for (std::size_t j = 0; j < kFeatureCount; ++j) rows(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = f[j];
  }
  // Prefix count of gap boundaries so each window check is O(1).
  std::vector<std::size_t> gaps(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) gaps[k + 1] = gaps[k] + (traj.gap_before(k) ? 1 : 0);

  std::vector<ShiftSample> samples;
  samples.reserve(n - window_len - 1);
  for (std::size_t a = 0; a + window_len + 1 < n; ++a) {
    // Records a+1 .. a+window_len+1 must not start a gap.
    if (gaps[a + window_len + 2] - gaps[a + 1] != 0) continue;
    ShiftSample s;
    s.window = rows.middleRows(static_cast<Eigen::Index>(a + 1), static_cast<Eigen::Index>(window_len));
    s.target_index = a + window_len;
    s.target = shifts[s.target_index];
    samples.push_back(std::move(s));
  }
  return samples;
}

DatasetSplit split_chronological(std::vector<ShiftSample> samples, double validation_fraction) {
  DatasetSplit split;
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(samples.size()) * (1.0 - validation_fraction)));
  split.validation.assign(std::make_move_iterator(samples.begin() + static_cast<std::ptrdiff_t>(n_train)),
                          std::make_move_iterator(samples.end()));
  samples.resize(n_train);
  split.train = std::move(samples);
  return split;
}

// ---------------------------------------------------------------------------

TrainingResult train(std::span<const ShiftSample> training, std::span<const ShiftSample> validation,
                     const NormalizationParams& norm, const TrainingConfig& config) {
  config.validate();
  if (training.empty()) throw Error(Errc::EmptyDataset, "no training samples");
  if (validation.empty()) throw Error(Errc::EmptyDataset, "no validation samples");
  for (const auto* set : {&training, &validation})
    for (const auto& s : *set)
      if (s.window.rows() != static_cast<Eigen::Index>(config.window_len) ||
          s.window.cols() != static_cast<Eigen::Index>(kFeatureCount))
        throw Error(Errc::DimensionMismatch, "sample window shape does not match window_len x 4");

  Rng rng(config.seed);
  const std::size_t hidden[] = {config.neurons_layer1, config.neurons_layer2};
  TrainingResult result;
  PredictionModel& model = result.model;
  model.weights = LstmWeights::uniform_init(kFeatureCount, hidden, rng);
  model.norm = norm;
  model.window_len = config.window_len;
  model.mode = config.mode;
  model.gnss_positioning_error = config.gnss_positioning_error_m;

  AdamOptimizer adam({config.learning_rate, config.beta1, config.beta2, config.epsilon});
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> val_idx(validation.size());
  std::iota(val_idx.begin(), val_idx.end(), 0);
  LstmWeights grads;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const double loss = mae_loss_and_gradients(model.weights, assemble_batch(training, idx, config.window_len),
                                                 normalized_targets(training, idx, norm.shift()), grads);
      if (!std::isfinite(loss)) throw Error(Errc::Diverged, "non-finite training loss at epoch " + std::to_string(epoch));
      loss_sum += loss * static_cast<double>(idx.size());
      const auto params = parameter_views(model.weights);
      const auto grad_views = parameter_views(std::as_const(grads));
      adam.step(params, grad_views);
    }
    if (!model.weights.all_finite()) throw Error(Errc::Diverged, "non-finite weights at epoch " + std::to_string(epoch));
    result.report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));

    double val_sum = 0.0;
    for (std::size_t start = 0; start < val_idx.size(); start += 1024) {
      const std::size_t stop = std::min(val_idx.size(), start + 1024);
      const std::span<const std::size_t> idx(val_idx.data() + start, stop - start);
      val_sum += mae_loss(model.weights, assemble_batch(validation, idx, config.window_len),
                          normalized_targets(validation, idx, norm.shift())) *
                 static_cast<double>(idx.size());
    }
    result.report.validation_loss.push_back(val_sum / static_cast<double>(val_idx.size()));
    if (config.on_epoch) config.on_epoch(epoch, result.report.train_loss.back(), result.report.validation_loss.back());
  }

  const auto stats = evaluate(model, validation);
  model.rmse = stats.rmse;
  model.max_abs_error = stats.max_abs_error;
  model.error_threshold = compute_error_threshold(stats.max_abs_error, config.gnss_positioning_error_m);
  result.report.train_samples = training.size();
  result.report.validation_samples = validation.size();
  return result;
}

TrainingResult train_on_trajectories(std::span<const Trajectory> trajectories, const TrainingConfig& config) {
  config.validate();
  if (trajectories.empty()) throw Error(Errc::EmptyDataset, "no trajectories to train on");

  FeatureSeries pooled;
  for (const auto& traj : trajectories) {
    const auto split_at = static_cast<std::size_t>(
        std::floor(static_cast<double>(traj.size()) * (1.0 - config.validation_fraction)));
    const auto fs = collect_features(traj, config.mode, 1, split_at);
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      pooled.series[f].insert(pooled.series[f].end(), fs.series[f].begin(), fs.series[f].end());
  }
  const auto norm = fit_normalization(pooled);

  std::vector<ShiftSample> training;
  std::vector<ShiftSample> validation;
  for (const auto& traj : trajectories) {
    auto split = split_chronological(build_supervised_dataset(traj, norm, config.window_len, config.mode),
                                     config.validation_fraction);
    std::move(split.train.begin(), split.train.end(), std::back_inserter(training));
    std::move(split.validation.begin(), split.validation.end(), std::back_inserter(validation));
  }
  return train(training, validation, norm, config);
}

ErrorStats error_stats(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.empty()) throw Error(Errc::EmptyDataset, "no samples to evaluate");
  if (predicted.size() != actual.size()) throw Error(Errc::DimensionMismatch, "prediction/actual length mismatch");
  double sq_sum = 0.0;
  double max_abs = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = std::abs(predicted[i] - actual[i]);
    sq_sum += e * e;
    max_abs = std::max(max_abs, e);
  }
  return {std::sqrt(sq_sum / static_cast<double>(predicted.size())), max_abs};
}

ErrorStats evaluate(const PredictionModel& model, std::span<const ShiftSample> samples) {
  if (samples.empty()) throw Error(Errc::EmptyDataset, "no samples to evaluate");
  const auto predicted = model.predict(samples);
  std::vector<double> actual;
  actual.reserve(samples.size());
  for (const auto& s : samples) actual.push_back(s.target);
  return error_stats(predicted, actual);
}

double compute_error_threshold(double max_abs_error, double gnss_positioning_error) {
  if (max_abs_error < 0.0 || gnss_positioning_error < 0.0)
    throw Error(Errc::NegativeInput, "threshold components must be non-negative");
  return max_abs_error + gnss_positioning_error;
}

std::optional<ShiftAlarm> check_shift(double perceived_shift, double predicted_shift, double threshold) {
  const double diff = std::abs(perceived_shift - predicted_shift);
  if (diff > threshold) return ShiftAlarm{diff};
  return std::nullopt;
}

// ---------------------------------------------------------------------------

json model_to_json(const PredictionModel& model) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["dims"] = {{"input", model.weights.input_dim()}, {"hidden", model.weights.hidden_dims()}, {"output", 1}};
  doc["window_len"] = model.window_len;
  doc["input_mode"] = to_string(model.mode);
  json norm;
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    norm[kFeatureNames[f]] = {{"min", model.norm.ranges[f].min}, {"max", model.norm.ranges[f].max}};
  doc["normalization"] = norm;
  json layers = json::array();
  for (const auto& l : model.weights.layers) {
    layers.push_back({{"gate_order", {"input", "forget", "candidate", "output"}},
                      {"rows", l.weights.rows()},
                      {"cols", l.weights.cols()},
                      {"weights", matrix_to_json(l.weights)},
                      {"bias", matrix_to_json(l.bias)}});
  }
  doc["layers"] = layers;
  doc["head"] = {{"weights", matrix_to_json(model.weights.head_weights)}, {"bias", model.weights.head_bias(0)}};
  doc["thresholds"] = {{"max_abs_error", model.max_abs_error},
                       {"rmse", model.rmse},
                       {"gnss_positioning_error", model.gnss_positioning_error},
                       {"error_threshold", model.error_threshold}};
  return doc;
}

PredictionModel model_from_json(const json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
      throw Error(Errc::InvalidInput, "unsupported model format_version");
    PredictionModel model;
    model.window_len = doc.at("window_len").get<std::size_t>();
    model.mode = input_mode_from_string(doc.at("input_mode").get<std::string>());
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const auto& r = doc.at("normalization").at(kFeatureNames[f]);
      model.norm.ranges[f] = {r.at("min").get<double>(), r.at("max").get<double>()};
      if (model.norm.ranges[f].max < model.norm.ranges[f].min)
        throw Error(Errc::InvalidInput, "normalization max < min");
    }
    const auto input_dim = doc.at("dims").at("input").get<std::size_t>();
    const auto hidden = doc.at("dims").at("hidden").get<std::vector<std::size_t>>();
    model.weights = LstmWeights::zeros(input_dim, hidden);
    const auto& layers = doc.at("layers");
    if (layers.size() != hidden.size()) throw Error(Errc::DimensionMismatch, "layer count does not match dims");
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      auto& layer = model.weights.layers[l];
      layer.weights = matrix_from_json(layers[l].at("weights"), layer.weights.rows(), layer.weights.cols());
      layer.bias = matrix_from_json(layers[l].at("bias"), layer.bias.size(), 1);
    }
    model.weights.head_weights =
        matrix_from_json(doc.at("head").at("weights"), model.weights.head_weights.size(), 1);
    model.weights.head_bias(0) = doc.at("head").at("bias").get<double>();
    const auto& th = doc.at("thresholds");
    model.max_abs_error = th.at("max_abs_error").get<double>();
    model.rmse = th.at("rmse").get<double>();
    model.gnss_positioning_error = th.at("gnss_positioning_error").get<double>();
    model.error_threshold = th.at("error_threshold").get<double>();
    if (!model.weights.all_finite()) throw Error(Errc::InvalidInput, "model contains non-finite weights");
    if (model.error_threshold != model.max_abs_error + model.gnss_positioning_error || !(model.error_threshold > 0.0))
      throw Error(Errc::InvalidInput, "error_threshold must equal max_abs_error + gnss_positioning_error and be > 0");
    return model;
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::string& path, const PredictionModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open '" + path + "' for writing");
  out << model_to_json(model).dump() << '\n';
  if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
}

PredictionModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open model '" + path + "'");
  try {
    return model_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(Errc::Parse, std::string("model is not valid JSON: ") + e.what());
  }
}

}  // namespace gnssguard
