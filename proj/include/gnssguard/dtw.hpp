#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace gnssguard {

struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  /// Starts at (0,0), ends at (n-1,m-1), every step advances i, j or both by 1.
  bool is_valid(std::size_t n, std::size_t m) const noexcept;
};

struct DtwResult {
  double distance = 0.0;  // sqrt of the summed squared differences along `path`
  WarpPath path;
};

enum class WarpStep { Diagonal, AdvanceI, AdvanceJ };

/// Chooses among equal-or-unequal cumulative costs of the three forward
/// steps. Lowest cost wins; ties prefer the diagonal, then advancing i, then
/// advancing j. Unavailable steps carry +infinity.
WarpStep tie_break_step(double diagonal, double advance_i, double advance_j) noexcept;

/// Full O(|T|·|S|) dynamic program, no band.
DtwResult dtw_exact(std::span<const double> t, std::span<const double> s);

/// Multi-resolution approximation: coarsen by pairwise averaging, solve,
/// project and refine within `radius`. Falls back to dtw_exact when either
/// series has at most 2·radius + 2 samples.
DtwResult fastdtw(std::span<const double> t, std::span<const double> s, std::size_t radius = 1);

/// Pairwise average; an odd tail element is carried over unaveraged.
std::vector<double> coarsen(std::span<const double> series);

/// Per-row inclusive column bounds [lo, hi] of a search window.
struct WarpWindow {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
};

/// DTW restricted to a window. The window must connect (0,0) to (n-1,m-1).
DtwResult dtw_windowed(std::span<const double> t, std::span<const double> s, const WarpWindow& window);

/// Window for the fine resolution grid derived from a coarse path.
WarpWindow project_window(const WarpPath& coarse, std::size_t n, std::size_t m, std::size_t radius);

}  // namespace gnssguard
