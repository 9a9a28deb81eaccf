#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnssguard/lstm.hpp"
#include "gnssguard/random.hpp"
#include "gnssguard/trajectory.hpp"

namespace testsupport {

/// Minimum over every monotone, continuous warp path of the in-order summed
/// squared cost, then sqrt. Exponential; only for short series.
double brute_force_dtw(std::span<const double> t, std::span<const double> s);

/// Great-circle distance by the spherical law of cosines (independent of
/// the haversine implementation).
double law_of_cosines_m(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

/// Straight constant-speed track built by repeated great-circle steps.
gnssguard::Trajectory straight_track(std::size_t n, double speed_mps, double rate_hz = 120.0,
                                     double bearing_deg = 90.0, double lat_deg = 37.0, double lon_deg = -122.0);

/// Every fix identical, wheel speed as given (ft/s).
gnssguard::Trajectory frozen_track(std::size_t n, double speed_ftps, double rate_hz = 120.0);

/// Random walk of length n, smoothed, for DTW tests.
std::vector<double> smooth_series(std::size_t n, gnssguard::Rng& rng);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

/// Central-difference check of mae_loss_and_gradients on a 4 -> 3 -> 2 -> 1
/// network with N(0, 0.1) parameters. Relative error uses
/// max(|analytic|, |numeric|, 1e-6) as the denominator.
GradCheck lstm_gradient_check(std::uint64_t seed, double h = 1e-5);

}  // namespace testsupport
