#include "gnssguard/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnssguard/error.hpp"

namespace gnssguard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cost matrix stored row by row over the window's column bounds.
class BandMatrix {
 public:
  explicit BandMatrix(const WarpWindow& window) : rows_(window.rows), offsets_(window.rows.size() + 1, 0) {
    for (std::size_t i = 0; i < rows_.size(); ++i)
      offsets_[i + 1] = offsets_[i] + (rows_[i].second - rows_[i].first + 1);
    data_.assign(offsets_.back(), kInf);
  }

  bool contains(std::size_t i, std::size_t j) const noexcept {
    return i < rows_.size() && j >= rows_[i].first && j <= rows_[i].second;
  }
  double get(std::size_t i, std::size_t j) const noexcept {
    return contains(i, j) ? data_[offsets_[i] + (j - rows_[i].first)] : kInf;
  }
  double& at(std::size_t i, std::size_t j) noexcept { return data_[offsets_[i] + (j - rows_[i].first)]; }
  const std::pair<std::size_t, std::size_t>& row(std::size_t i) const noexcept { return rows_[i]; }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> rows_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
};

double sq(double x) noexcept { return x * x; }

WarpWindow full_window(std::size_t n, std::size_t m) {
  return WarpWindow{std::vector<std::pair<std::size_t, std::size_t>>(n, {0, m - 1})};
}

void require_non_empty(std::span<const double> t, std::span<const double> s) {
  if (t.empty() || s.empty()) throw Error(Errc::EmptySeries, "DTW requires non-empty series");
}

}  // namespace

bool WarpPath::is_valid(std::size_t n, std::size_t m) const noexcept {
  if (pairs.empty() || pairs.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (pairs.back() != std::pair<std::size_t, std::size_t>{n - 1, m - 1}) return false;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    const auto di = pairs[k].first - pairs[k - 1].first;
    const auto dj = pairs[k].second - pairs[k - 1].second;
    if (pairs[k].first < pairs[k - 1].first || pairs[k].second < pairs[k - 1].second) return false;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

WarpStep tie_break_step(double diagonal, double advance_i, double advance_j) noexcept {
  if (diagonal <= advance_i && diagonal <= advance_j) return WarpStep::Diagonal;
  if (advance_i <= advance_j) return WarpStep::AdvanceI;
  return WarpStep::AdvanceJ;
}

DtwResult dtw_windowed(std::span<const double> t, std::span<const double> s, const WarpWindow& window) {
  require_non_empty(t, s);
  const std::size_t n = t.size();
  const std::size_t m = s.size();
  if (window.rows.size() != n) throw Error(Errc::DimensionMismatch, "window rows must match |T|");

  // Prefix costs: D(i,j) = c(i,j) + min(D(i-1,j-1), D(i-1,j), D(i,j-1)). Summing
  // from the start keeps the distance bit-identical to an in-order path sum.
  BandMatrix prefix(window);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [lo, hi] = prefix.row(i);
    for (std::size_t j = lo; j <= hi && j < m; ++j) {
      const double c = sq(t[i] - s[j]);
      if (i == 0 && j == 0) {
        prefix.at(i, j) = c;
        continue;
      }
      double best = kInf;
      if (i > 0 && j > 0) best = std::min(best, prefix.get(i - 1, j - 1));
      if (i > 0) best = std::min(best, prefix.get(i - 1, j));
      if (j > 0) best = std::min(best, prefix.get(i, j - 1));
      prefix.at(i, j) = best + c;
    }
  }
  const double total = prefix.get(n - 1, m - 1);
  if (!std::isfinite(total)) throw Error(Errc::Invariant, "DTW window does not connect the corners");

  // Suffix costs drive a forward trace so the tie-break policy applies in
  // the direction of travel.
  BandMatrix suffix(window);
  for (std::size_t ii = n; ii-- > 0;) {
    const auto [lo, hi] = suffix.row(ii);
    for (std::size_t jj = std::min(hi, m - 1) + 1; jj-- > lo;) {
      const double c = sq(t[ii] - s[jj]);
      if (ii == n - 1 && jj == m - 1) {
        suffix.at(ii, jj) = c;
        continue;
      }
      const double best = std::min({suffix.get(ii + 1, jj + 1), suffix.get(ii + 1, jj), suffix.get(ii, jj + 1)});
      suffix.at(ii, jj) = best + c;
    }
  }

  DtwResult result;
  result.distance = std::sqrt(total);
  std::size_t i = 0;
  std::size_t j = 0;
  result.path.pairs.reserve(n + m);
  result.path.pairs.emplace_back(0, 0);
  while (i + 1 < n || j + 1 < m) {
    switch (tie_break_step(suffix.get(i + 1, j + 1), suffix.get(i + 1, j), suffix.get(i, j + 1))) {
      case WarpStep::Diagonal: ++i, ++j; break;
      case WarpStep::AdvanceI: ++i; break;
      case WarpStep::AdvanceJ: ++j; break;
    }
    result.path.pairs.emplace_back(i, j);
  }
  return result;
}

DtwResult dtw_exact(std::span<const double> t, std::span<const double> s) {
  require_non_empty(t, s);
  return dtw_windowed(t, s, full_window(t.size(), s.size()));
}

std::vector<double> coarsen(std::span<const double> series) {
  std::vector<double> out;
  out.reserve((series.size() + 1) / 2);
  std::size_t i = 0;
  for (; i + 1 < series.size(); i += 2) out.push_back(0.5 * (series[i] + series[i + 1]));
  if (i < series.size()) out.push_back(series[i]);
  return out;
}

WarpWindow project_window(const WarpPath& coarse, std::size_t n, std::size_t m, std::size_t radius) {
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  WarpWindow window{std::vector<std::pair<std::size_t, std::size_t>>(n, {kUnset, 0})};
  for (const auto& [ci, cj] : coarse.pairs) {
    const std::size_t r0 = 2 * ci > radius ? 2 * ci - radius : 0;
    const std::size_t r1 = std::min(n - 1, 2 * ci + 1 + radius);
    const std::size_t c0 = 2 * cj > radius ? 2 * cj - radius : 0;
    const std::size_t c1 = std::min(m - 1, 2 * cj + 1 + radius);
    for (std::size_t r = r0; r <= r1; ++r) {
      auto& row = window.rows[r];
      row.first = std::min(row.first, c0);
      row.second = std::max(row.second, c1);
    }
  }
  for (auto& row : window.rows)
    if (row.first == kUnset) row = {0, m - 1};  // unreachable for a valid coarse path
  return window;
}

DtwResult fastdtw(std::span<const double> t, std::span<const double> s, std::size_t radius) {
  require_non_empty(t, s);
  const std::size_t min_size = 2 * radius + 2;
  if (t.size() <= min_size || s.size() <= min_size) return dtw_exact(t, s);
  const auto t_coarse = coarsen(t);
  const auto s_coarse = coarsen(s);
  const auto low_res = fastdtw(t_coarse, s_coarse, radius);
  return dtw_windowed(t, s, project_window(low_res.path, t.size(), s.size(), radius));
}

}  // namespace gnssguard
