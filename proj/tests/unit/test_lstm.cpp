#include <cmath>
#include <vector>

#include "doctest.h"

#include "gnssguard/lstm.hpp"
#include "gnssguard/random.hpp"
#include "test_support.hpp"

using namespace gnssguard;

namespace {

const std::size_t kHidden[] = {3, 2};

}  // namespace

TEST_CASE("lstm: zero weights output the head bias") {
  LstmWeights w = LstmWeights::zeros(4, kHidden);
  w.head_bias(0) = 0.375;
  Rng rng(1);
  Eigen::MatrixXd window(10, 4);
  for (Eigen::Index i = 0; i < window.size(); ++i) window.data()[i] = rng.uniform();
  CHECK(lstm_forward(w, window) == 0.375);
}

TEST_CASE("lstm: parameter count and views agree") {
  Rng rng(2);
  LstmWeights w = LstmWeights::uniform_init(4, kHidden, rng);
  // layer 1: 12 x (4 + 3) + 12, layer 2: 8 x (3 + 2) + 8, head: 2 + 1
  CHECK(w.parameter_count() == 12 * 7 + 12 + 8 * 5 + 8 + 3);
  std::size_t total = 0;
  for (auto v : parameter_views(w)) total += v.size();
  CHECK(total == w.parameter_count());
  CHECK(w.all_finite());
  CHECK(w.hidden_dims() == std::vector<std::size_t>{3, 2});
}

TEST_CASE("lstm: initial weights respect the fan-in bound") {
  Rng rng(3);
  LstmWeights w = LstmWeights::uniform_init(4, kHidden, rng);
  const double b1 = 1.0 / std::sqrt(7.0), b2 = 1.0 / std::sqrt(5.0);
  CHECK(w.layers[0].weights.cwiseAbs().maxCoeff() <= b1);
  CHECK(w.layers[1].weights.cwiseAbs().maxCoeff() <= b2);
}

TEST_CASE("lstm: batched and single-window forward agree") {
  Rng rng(4);
  LstmWeights w = LstmWeights::uniform_init(4, kHidden, rng);
  const std::size_t steps = 6, batch = 5;
  SequenceBatch sb(steps, Eigen::MatrixXd(4, batch));
  for (auto& m : sb)
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform();
  const Eigen::RowVectorXd y = lstm_forward_batch(w, sb);
  for (std::size_t b = 0; b < batch; ++b) {
    Eigen::MatrixXd window(steps, 4);
    for (std::size_t t = 0; t < steps; ++t) window.row(t) = sb[t].col(b).transpose();
    CHECK(lstm_forward(w, window) == doctest::Approx(y(b)).epsilon(1e-14));
  }
}

TEST_CASE("lstm: analytic gradients match central differences") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto g = testsupport::lstm_gradient_check(seed);
    CHECK(g.parameters > 100);
    CHECK(g.max_rel_error < 1e-4);
  }
}

TEST_CASE("adam: first step moves each parameter by the learning rate against its gradient") {
  std::vector<double> p{0.0, 1.0, -2.0};
  const std::vector<double> g{0.5, -3.0, 1e-3};
  AdamOptimizer opt(AdamConfig{});
  std::vector<std::span<double>> pv{std::span<double>(p)};
  std::vector<std::span<const double>> gv{std::span<const double>(g)};
  opt.step(pv, gv);
  CHECK(opt.steps_taken() == 1);
  CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(1.01).epsilon(1e-6));
  CHECK(p[2] == doctest::Approx(-2.01).epsilon(1e-4));
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
  std::vector<double> p{0.25, -0.5};
  const std::vector<double> g{0.0, 0.0};
  AdamOptimizer opt(AdamConfig{});
  std::vector<std::span<double>> pv{std::span<double>(p)};
  std::vector<std::span<const double>> gv{std::span<const double>(g)};
  for (int i = 0; i < 3; ++i) opt.step(pv, gv);
  CHECK(p[0] == 0.25);
  CHECK(p[1] == -0.5);
}

TEST_CASE("adam: repeated steps minimize a quadratic") {
  std::vector<double> p{3.0};
  std::vector<double> g{0.0};
  AdamOptimizer opt(AdamConfig{0.1});
  std::vector<std::span<double>> pv{std::span<double>(p)};
  std::vector<std::span<const double>> gv{std::span<const double>(g)};
  for (int i = 0; i < 500; ++i) {
    g[0] = 2.0 * (p[0] - 1.0);
    opt.step(pv, gv);
  }
  CHECK(std::abs(p[0] - 1.0) < 1e-2);
}

TEST_CASE("lstm: same seed gives identical weights") {
  Rng a(9), b(9);
  const auto wa = LstmWeights::uniform_init(4, kHidden, a);
  const auto wb = LstmWeights::uniform_init(4, kHidden, b);
  const auto va = parameter_views(wa), vb = parameter_views(wb);
  for (std::size_t k = 0; k < va.size(); ++k)
    for (std::size_t i = 0; i < va[k].size(); ++i) CHECK(va[k][i] == vb[k][i]);
}
