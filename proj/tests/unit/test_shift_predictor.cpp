#include <cmath>
#include <vector>

#include "doctest.h"

#include "gnssguard/error.hpp"
#include "gnssguard/shift_predictor.hpp"
#include "test_support.hpp"

using namespace gnssguard;

namespace {

TrainingConfig small_config() {
  TrainingConfig c;
  c.neurons_layer1 = 8;
  c.neurons_layer2 = 4;
  c.epochs = 5;
  c.batch_size = 16;
  c.seed = 3;
  return c;
}

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

TEST_CASE("dataset: window counts") {
  const auto traj = testsupport::straight_track(20, 10.0);
  const auto norm = fit_normalization(collect_features(traj, InputMode::PaperFaithful));
  CHECK(build_supervised_dataset(traj, norm, 10).size() == 9);
  CHECK(build_supervised_dataset(testsupport::straight_track(12, 10.0), norm, 10).size() == 1);
  CHECK(code_of([&] { build_supervised_dataset(testsupport::straight_track(11, 10.0), norm, 10); }) == Errc::TooShort);
}

TEST_CASE("dataset: target is the next shift after the window") {
  auto traj = testsupport::straight_track(30, 10.0);
  for (std::size_t i = 0; i < traj.size(); ++i) traj.records[i].speed = static_cast<double>(i);
  const auto norm = fit_normalization(collect_features(traj, InputMode::PaperFaithful));
  const auto shifts = compute_location_shifts(traj);
  const auto ds = build_supervised_dataset(traj, norm, 10);
  for (std::size_t a = 0; a < ds.size(); ++a) {
    CHECK(ds[a].target == shifts[a + 10]);
    CHECK(ds[a].window.rows() == 10);
    CHECK(ds[a].window.cols() == 4);
    // last window row is record a + 10
    CHECK(ds[a].window(9, kSpeed) == doctest::Approx(norm.ranges[kSpeed].normalize(a + 10.0)));
  }
}

TEST_CASE("dataset: windows touching a gap are dropped") {
  auto traj = testsupport::straight_track(40, 10.0);
  for (std::size_t i = 20; i < traj.size(); ++i) traj.records[i].t += 5.0;
  const auto norm = fit_normalization(collect_features(traj, InputMode::PaperFaithful));
  const auto ds = build_supervised_dataset(traj, norm, 10);
  CHECK(ds.size() < 40 - 11);
  for (const auto& s : ds) {
    const std::size_t first = s.target_index - 9;
    CHECK((s.target_index + 1 < 20 || first > 20));
  }
}

TEST_CASE("hardened mode feeds dead-reckoned shifts") {
  auto traj = testsupport::straight_track(5, 10.0);
  for (auto& r : traj.records) r.lat = 37.0, r.lon = -122.0;  // GNSS frozen
  const auto shifts = compute_location_shifts(traj);
  CHECK(shift_feature(traj, shifts, 2, InputMode::PaperFaithful) == 0.0);
  const double dt = traj.records[2].t - traj.records[1].t;
  CHECK(shift_feature(traj, shifts, 2, InputMode::Hardened) ==
        doctest::Approx(traj.records[2].speed * kFeetToMeters * dt).epsilon(1e-12));
}

TEST_CASE("threshold is max error plus GNSS error") {
  CHECK(compute_error_threshold(0.0446, 0.1) == 0.1446);
  CHECK(compute_error_threshold(0.05, 0.02) == 0.07);
  CHECK(compute_error_threshold(0.0, 0.0) == 0.0);
  CHECK(code_of([] { compute_error_threshold(-0.01, 0.1); }) == Errc::NegativeInput);
  CHECK(code_of([] { compute_error_threshold(0.01, -0.1); }) == Errc::NegativeInput);
}

TEST_CASE("check_shift fires strictly above the threshold") {
  CHECK_FALSE(check_shift(0.30, 0.25, 0.1446).has_value());
  const auto a = check_shift(0.50, 0.25, 0.1446);
  REQUIRE(a.has_value());
  CHECK(a->difference == 0.25);
  CHECK_FALSE(check_shift(0.0, 0.0, 0.0).has_value());
  CHECK_FALSE(check_shift(1.0, 0.5, 0.5).has_value());
  CHECK(check_shift(0.0, 0.5, 0.1).has_value());
}

TEST_CASE("error stats against a hand computation") {
  const std::vector<double> pred{1.0, 2.0, 3.0}, actual{1.0, 2.4, 3.3};
  const auto s = error_stats(pred, actual);
  CHECK(s.max_abs_error == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(s.rmse == doctest::Approx(std::sqrt((0.16 + 0.09) / 3.0)).epsilon(1e-12));
  const std::vector<double> a2{0.0, 0.0}, b2{0.3, -0.4};
  const auto s2 = error_stats(a2, b2);
  CHECK(s2.max_abs_error == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(s2.rmse == doctest::Approx(std::sqrt(0.125)).epsilon(1e-12));
  CHECK(code_of([&] { error_stats(pred, b2); }) == Errc::DimensionMismatch);
}

TEST_CASE("chronological split keeps order") {
  const auto traj = testsupport::straight_track(60, 10.0);
  const auto norm = fit_normalization(collect_features(traj, InputMode::PaperFaithful));
  const auto split = split_chronological(build_supervised_dataset(traj, norm, 10), 0.3);
  CHECK(split.train.size() + split.validation.size() == 49);
  CHECK(split.train.back().target_index < split.validation.front().target_index);
}

TEST_CASE("training on a constant-speed track learns the constant shift") {
  const std::vector<Trajectory> trajs{testsupport::straight_track(400, 10.0), testsupport::straight_track(400, 10.0, 120, 45)};
  const auto res = train_on_trajectories(trajs, small_config());
  CHECK(res.report.train_loss.size() == 5);
  CHECK(res.report.validation_loss.size() == 5);
  CHECK(res.model.max_abs_error < 1e-3);
  CHECK(res.model.rmse <= res.model.max_abs_error);
  CHECK(res.model.error_threshold == compute_error_threshold(res.model.max_abs_error, 0.1));
}

TEST_CASE("training is deterministic for a fixed seed") {
  const std::vector<Trajectory> trajs{testsupport::straight_track(300, 8.0)};
  const auto a = train_on_trajectories(trajs, small_config());
  const auto b = train_on_trajectories(trajs, small_config());
  CHECK(model_to_json(a.model).dump() == model_to_json(b.model).dump());
}

TEST_CASE("model JSON round trip preserves predictions") {
  const std::vector<Trajectory> trajs{testsupport::straight_track(300, 8.0)};
  const auto res = train_on_trajectories(trajs, small_config());
  const auto back = model_from_json(model_to_json(res.model));
  const auto ds = build_supervised_dataset(trajs[0], res.model.norm, 10);
  for (std::size_t i = 0; i < ds.size(); i += 17) CHECK(back.predict(ds[i].window) == res.model.predict(ds[i].window));
  CHECK(back.error_threshold == res.model.error_threshold);
  const auto batch = res.model.predict(ds);
  REQUIRE(batch.size() == ds.size());
  CHECK(batch[5] == doctest::Approx(res.model.predict(ds[5].window)).epsilon(1e-12));
}

TEST_CASE("model JSON with inconsistent dimensions is rejected") {
  const std::vector<Trajectory> trajs{testsupport::straight_track(300, 8.0)};
  auto doc = model_to_json(train_on_trajectories(trajs, small_config()).model);
  doc["dims"]["hidden"][0] = 9;
  CHECK(code_of([&] { model_from_json(doc); }) == Errc::DimensionMismatch);
}

TEST_CASE("invalid training configuration") {
  auto c = small_config();
  c.validation_fraction = 1.0;
  CHECK(code_of([&] { c.validate(); }) == Errc::InvalidConfig);
  c = small_config();
  c.learning_rate = 0.0;
  CHECK(code_of([&] { c.validate(); }) == Errc::InvalidConfig);
  CHECK(code_of([] { input_mode_from_string("nope"); }) == Errc::InvalidConfig);
  CHECK(input_mode_from_string("hardened") == InputMode::Hardened);
}
