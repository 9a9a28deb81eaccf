#include <cmath>
#include <vector>

#include "doctest.h"

#include "gnssguard/dtw.hpp"
#include "gnssguard/random.hpp"
#include "test_support.hpp"

using namespace gnssguard;

namespace {

double path_cost(std::span<const double> t, std::span<const double> s, const WarpPath& p) {
  double acc = 0.0;
  for (auto [i, j] : p.pairs) acc += (t[i] - s[j]) * (t[i] - s[j]);
  return std::sqrt(acc);
}

std::vector<double> random_series(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-2, 2);
  return v;
}

}  // namespace

TEST_CASE("dtw: small closed forms") {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  CHECK(dtw_exact(a, b).distance == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  const std::vector<double> c{0, 1, 2}, d{0, 1, 2, 2};
  CHECK(dtw_exact(c, d).distance == 0.0);

  const std::vector<double> e{5, 5, 5};
  CHECK(dtw_exact(e, e).distance == 0.0);
}

TEST_CASE("dtw: equal-cost tie resolves diagonal first") {
  const std::vector<double> a{0, 0}, b{0, 0, 0};
  const auto r = dtw_exact(a, b);
  using P = std::pair<std::size_t, std::size_t>;
  REQUIRE(r.path.pairs.size() == 3);
  CHECK(r.path.pairs[0] == P{0, 0});
  CHECK(r.path.pairs[1] == P{1, 1});
  CHECK(r.path.pairs[2] == P{1, 2});
}

TEST_CASE("dtw: tie_break_step ordering") {
  const double inf = INFINITY;
  CHECK(tie_break_step(1, 1, 1) == WarpStep::Diagonal);
  CHECK(tie_break_step(2, 1, 1) == WarpStep::AdvanceI);
  CHECK(tie_break_step(2, 3, 1) == WarpStep::AdvanceJ);
  CHECK(tie_break_step(inf, inf, 0) == WarpStep::AdvanceJ);
  CHECK(tie_break_step(inf, 4, inf) == WarpStep::AdvanceI);
}

TEST_CASE("dtw: exact matches a brute-force enumeration") {
  Rng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const auto a = random_series(rng, 1 + rng.index(6));
    const auto b = random_series(rng, 1 + rng.index(6));
    const auto r = dtw_exact(a, b);
    CHECK(r.distance == testsupport::brute_force_dtw(a, b));
    CHECK(r.path.is_valid(a.size(), b.size()));
    CHECK(path_cost(a, b, r.path) == doctest::Approx(r.distance).epsilon(1e-12));
  }
}

TEST_CASE("dtw: symmetry, identity and the lock-step upper bound") {
  Rng rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + rng.index(40);
    const auto a = random_series(rng, n);
    const auto b = random_series(rng, n);
    CHECK(dtw_exact(a, b).distance == doctest::Approx(dtw_exact(b, a).distance).epsilon(1e-12));
    CHECK(dtw_exact(a, a).distance == 0.0);
    double eu = 0.0;
    for (std::size_t i = 0; i < n; ++i) eu += (a[i] - b[i]) * (a[i] - b[i]);
    CHECK(dtw_exact(a, b).distance <= std::sqrt(eu) + 1e-12);
  }
}

TEST_CASE("fastdtw: never below exact, valid paths, exact on short inputs") {
  Rng rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = testsupport::smooth_series(5 + rng.index(150), rng);
    const auto b = testsupport::smooth_series(5 + rng.index(150), rng);
    for (std::size_t radius : {1u, 2u, 5u}) {
      const auto approx = fastdtw(a, b, radius);
      const auto exact = dtw_exact(a, b);
      CHECK(approx.distance >= exact.distance - 1e-9);
      CHECK(approx.path.is_valid(a.size(), b.size()));
      CHECK(path_cost(a, b, approx.path) == doctest::Approx(approx.distance).epsilon(1e-9));
    }
  }
  const std::vector<double> s{1, 3, 2}, t{0, 4};
  CHECK(fastdtw(s, t, 1).distance == dtw_exact(s, t).distance);
}

TEST_CASE("fastdtw: a radius covering the whole grid is exact") {
  Rng rng(24);
  for (int rep = 0; rep < 30; ++rep) {
    const auto a = testsupport::smooth_series(10 + rng.index(30), rng);
    const auto b = testsupport::smooth_series(10 + rng.index(30), rng);
    CHECK(fastdtw(a, b, 64).distance == doctest::Approx(dtw_exact(a, b).distance).epsilon(1e-12));
  }
}

TEST_CASE("coarsen halves and carries an odd tail") {
  const std::vector<double> even{1, 3, 5, 7}, odd{1, 3, 5};
  CHECK(coarsen(even) == std::vector<double>{2, 6});
  CHECK(coarsen(odd) == std::vector<double>{2, 5});
}

TEST_CASE("WarpPath validity") {
  WarpPath p;
  p.pairs = {{0, 0}, {1, 1}, {2, 1}};
  CHECK(p.is_valid(3, 2));
  CHECK_FALSE(p.is_valid(3, 3));
  p.pairs = {{0, 0}, {2, 1}};
  CHECK_FALSE(p.is_valid(3, 2));
  p.pairs = {{0, 0}, {1, 0}, {0, 1}, {2, 1}};
  CHECK_FALSE(p.is_valid(3, 2));
}

TEST_CASE("dtw: empty input is rejected") {
  const std::vector<double> a{1.0}, none;
  CHECK_THROWS(dtw_exact(a, none));
  CHECK_THROWS(fastdtw(none, a));
}
