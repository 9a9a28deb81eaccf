#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gnssguard/lstm.hpp"
#include "gnssguard/trajectory.hpp"

namespace gnssguard {

/// Which value feeds the shift feature of the input window.
///  PaperFaithful: the GNSS-derived location shift.
///  Hardened: wheel speed times the sampling interval (dead reckoning), so a
///  spoofed receiver cannot steer the model's own input.
enum class InputMode { PaperFaithful, Hardened };

const char* to_string(InputMode mode) noexcept;
InputMode input_mode_from_string(const std::string& s);

struct TrainingConfig {
  std::size_t neurons_layer1 = 128;
  std::size_t neurons_layer2 = 64;
  std::size_t epochs = 500;
  std::size_t batch_size = 50;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t window_len = 10;
  std::uint64_t seed = 0;
  double validation_fraction = 0.3;
  double gnss_positioning_error_m = 0.1;
  InputMode mode = InputMode::PaperFaithful;
  // Progress hook: (epoch, train loss, validation loss).
  std::function<void(std::size_t, double, double)> on_epoch;

  void validate() const;
};

struct ShiftSample {
  Eigen::MatrixXd window;  // window_len x 4, normalized features
  double target = 0.0;     // meters
  std::size_t target_index = 0;  // index of the shift being predicted
};

struct PredictionModel {
  LstmWeights weights;
  NormalizationParams norm;
  std::size_t window_len = 10;
  InputMode mode = InputMode::PaperFaithful;
  double max_abs_error = 0.0;
  double rmse = 0.0;
  double gnss_positioning_error = 0.1;
  double error_threshold = 0.1;

  /// Predicted next shift in meters for one normalized window.
  double predict(const Eigen::MatrixXd& window) const;
  /// Batched prediction in meters.
  std::vector<double> predict(std::span<const ShiftSample> samples, std::size_t chunk = 512) const;
};

struct TrainingReport {
  std::vector<double> train_loss;       // mean normalized MAE per epoch
  std::vector<double> validation_loss;  // normalized MAE per epoch
  std::size_t train_samples = 0;
  std::size_t validation_samples = 0;
};

struct TrainingResult {
  PredictionModel model;
  TrainingReport report;
};

struct ErrorStats {
  double rmse = 0.0;
  double max_abs_error = 0.0;
};

/// Raw value of the shift feature at record k (k >= 1) for the given mode.
double shift_feature(const Trajectory& traj, std::span<const double> shifts, std::size_t k, InputMode mode);

/// Feature series for normalization fitting over records [begin, end).
FeatureSeries collect_features(const Trajectory& traj, InputMode mode, std::size_t begin = 1,
                               std::size_t end = SIZE_MAX);

/// Sliding windows with stride 1. Window a covers records a+1 .. a+window_len
/// and targets the shift from record a+window_len to a+window_len+1. Windows
/// touching a gap boundary are dropped.
std::vector<ShiftSample> build_supervised_dataset(const Trajectory& traj, const NormalizationParams& norm,
                                                  std::size_t window_len,
                                                  InputMode mode = InputMode::PaperFaithful);

struct DatasetSplit {
  std::vector<ShiftSample> train;
  std::vector<ShiftSample> validation;
};

/// Chronological split: the trailing `validation_fraction` goes to validation.
DatasetSplit split_chronological(std::vector<ShiftSample> samples, double validation_fraction);

/// Mini-batch Adam on MAE. Evaluation stats and the error threshold are
/// computed on `validation`.
TrainingResult train(std::span<const ShiftSample> training, std::span<const ShiftSample> validation,
                     const NormalizationParams& norm, const TrainingConfig& config);

/// Fits normalization on the training portion of every trajectory, builds
/// windows, splits each trajectory chronologically and trains.
TrainingResult train_on_trajectories(std::span<const Trajectory> trajectories, const TrainingConfig& config);

ErrorStats error_stats(std::span<const double> predicted, std::span<const double> actual);
ErrorStats evaluate(const PredictionModel& model, std::span<const ShiftSample> samples);

double compute_error_threshold(double max_abs_error, double gnss_positioning_error);

struct ShiftAlarm {
  double difference = 0.0;  // |perceived - predicted|, meters
};

/// Alarm iff |perceived - predicted| > threshold.
std::optional<ShiftAlarm> check_shift(double perceived_shift, double predicted_shift, double threshold);

// Model persistence (versioned JSON, row-major weight arrays).
inline constexpr int kModelFormatVersion = 1;
nlohmann::json model_to_json(const PredictionModel& model);
PredictionModel model_from_json(const nlohmann::json& doc);
void save_model(const std::string& path, const PredictionModel& model);
PredictionModel load_model(const std::string& path);

}  // namespace gnssguard
