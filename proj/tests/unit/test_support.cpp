#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace testsupport {

using namespace gnssguard;

namespace {

void enumerate(std::span<const double> t, std::span<const double> s, std::size_t i, std::size_t j, double acc,
               double& best) {
  const double d = t[i] - s[j];
  acc += d * d;
  if (i + 1 == t.size() && j + 1 == s.size()) {
    best = std::min(best, acc);
    return;
  }
  if (i + 1 < t.size() && j + 1 < s.size()) enumerate(t, s, i + 1, j + 1, acc, best);
  if (i + 1 < t.size()) enumerate(t, s, i + 1, j, acc, best);
  if (j + 1 < s.size()) enumerate(t, s, i, j + 1, acc, best);
}

}  // namespace

double brute_force_dtw(std::span<const double> t, std::span<const double> s) {
  double best = std::numeric_limits<double>::infinity();
  enumerate(t, s, 0, 0, 0.0, best);
  return std::sqrt(best);
}

double law_of_cosines_m(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
  const double k = std::numbers::pi / 180.0;
  const double p1 = lat1_deg * k, p2 = lat2_deg * k, dl = (lon2_deg - lon1_deg) * k;
  const double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  return kEarthRadiusM * std::acos(std::clamp(c, -1.0, 1.0));
}

Trajectory straight_track(std::size_t n, double speed_mps, double rate_hz, double bearing_deg, double lat_deg,
                          double lon_deg) {
  Trajectory traj;
  traj.nominal_rate_hz = rate_hz;
  GeoPoint p = GeoPoint::from_degrees(lat_deg, lon_deg);
  const double bearing = bearing_deg * std::numbers::pi / 180.0;
  for (std::size_t i = 0; i < n; ++i) {
    SyncedRecord r;
    r.t = 1000.0 + static_cast<double>(i) / rate_hz;
    r.lat = p.lat_deg();
    r.lon = p.lon_deg();
    r.speed = speed_mps / kFeetToMeters;
    traj.records.push_back(r);
    p = destination_point(p, bearing, speed_mps / rate_hz);
  }
  return traj;
}

Trajectory frozen_track(std::size_t n, double speed_ftps, double rate_hz) {
  Trajectory traj;
  traj.nominal_rate_hz = rate_hz;
  for (std::size_t i = 0; i < n; ++i) {
    SyncedRecord r;
    r.t = 1000.0 + static_cast<double>(i) / rate_hz;
    r.lat = 37.0;
    r.lon = -122.0;
    r.speed = speed_ftps;
    traj.records.push_back(r);
  }
  return traj;
}

std::vector<double> smooth_series(std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  double x = rng.normal(), v = 0.0;
  for (auto& o : out) {
    v = 0.8 * v + 0.3 * rng.normal();
    x += v;
    o = x;
  }
  return out;
}

GradCheck lstm_gradient_check(std::uint64_t seed, double h) {
  Rng rng(seed);
  const std::size_t hidden[] = {3, 2};
  LstmWeights w = LstmWeights::zeros(4, hidden);
  for (auto view : parameter_views(w))
    for (double& x : view) x = rng.normal(0.0, 0.1);

  constexpr std::size_t kSteps = 5, kBatch = 3;
  SequenceBatch batch(kSteps, Eigen::MatrixXd(4, kBatch));
  for (auto& m : batch)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  // Targets well away from the outputs keep every residual clear of the
  // MAE kink at zero.
  const Eigen::RowVectorXd out = lstm_forward_batch(w, batch);
  Eigen::RowVectorXd targets(kBatch);
  for (std::size_t b = 0; b < kBatch; ++b)
    targets[static_cast<Eigen::Index>(b)] = out[static_cast<Eigen::Index>(b)] + (b % 2 ? 0.5 : -0.5);

  LstmWeights grads;
  mae_loss_and_gradients(w, batch, targets, grads);
  const auto gviews = parameter_views(std::as_const(grads));
  auto views = parameter_views(w);

  GradCheck result;
  for (std::size_t p = 0; p < views.size(); ++p) {
    for (std::size_t k = 0; k < views[p].size(); ++k) {
      double& x = views[p][k];
      const double saved = x;
      x = saved + h;
      const double up = mae_loss(w, batch, targets);
      x = saved - h;
      const double down = mae_loss(w, batch, targets);
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = gviews[p][k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(analytic - numeric) / denom);
      ++result.parameters;
    }
  }
  return result;
}

}  // namespace testsupport
