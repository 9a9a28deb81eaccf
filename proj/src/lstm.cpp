#include "gnssguard/lstm.hpp"

#include <cmath>

#include "gnssguard/error.hpp"

namespace gnssguard {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

MatrixXd sigmoid(const MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

struct StepCache {
  MatrixXd stacked;  // [x_t; h_{t-1}]
  MatrixXd gates;    // activated i, f, g, o blocks
  MatrixXd cell;
  MatrixXd cell_tanh;
};

struct LayerCache {
  std::vector<StepCache> steps;
  std::vector<MatrixXd> hidden;
};

void check_dims(const LstmWeights& w, const SequenceBatch& steps) {
  if (w.layers.empty()) throw Error(Errc::DimensionMismatch, "network has no layers");
  if (steps.empty()) throw Error(Errc::DimensionMismatch, "sequence has no time steps");
  const auto in = static_cast<Index>(w.input_dim());
  const Index batch = steps.front().cols();
  for (const auto& x : steps)
    if (x.rows() != in || x.cols() != batch)
      throw Error(Errc::DimensionMismatch, "input step shape does not match the network input dimension");
  for (std::size_t l = 1; l < w.layers.size(); ++l)
    if (w.layers[l].input_dim() != w.layers[l - 1].hidden_dim())
      throw Error(Errc::DimensionMismatch, "layer input does not match previous hidden size");
  if (static_cast<std::size_t>(w.head_weights.size()) != w.layers.back().hidden_dim())
    throw Error(Errc::DimensionMismatch, "head weights do not match top hidden size");
}

// Runs one layer over the whole sequence; returns per-step hidden outputs.
LayerCache forward_layer(const LstmLayer& layer, const std::vector<MatrixXd>& inputs, bool keep_cache) {
  const Index hdim = static_cast<Index>(layer.hidden_dim());
  const Index in = static_cast<Index>(layer.input_dim());
  const Index batch = inputs.front().cols();
  LayerCache cache;
  cache.hidden.reserve(inputs.size());
  if (keep_cache) cache.steps.reserve(inputs.size());

  MatrixXd h = MatrixXd::Zero(hdim, batch);
  MatrixXd c = MatrixXd::Zero(hdim, batch);
  MatrixXd stacked(in + hdim, batch);
  MatrixXd z(4 * hdim, batch);
  for (const auto& x : inputs) {
    stacked.topRows(in) = x;
    stacked.bottomRows(hdim) = h;
    z.noalias() = layer.weights * stacked;
    z.colwise() += layer.bias;
    MatrixXd gates(4 * hdim, batch);
    gates.topRows(2 * hdim) = sigmoid(z.topRows(2 * hdim));
    gates.middleRows(2 * hdim, hdim) = z.middleRows(2 * hdim, hdim).array().tanh().matrix();
    gates.bottomRows(hdim) = sigmoid(z.bottomRows(hdim));

    c = (gates.middleRows(hdim, hdim).array() * c.array() +
         gates.topRows(hdim).array() * gates.middleRows(2 * hdim, hdim).array())
            .matrix();
    MatrixXd ct = c.array().tanh().matrix();
    h = (gates.bottomRows(hdim).array() * ct.array()).matrix();
    cache.hidden.push_back(h);
    if (keep_cache) cache.steps.push_back({stacked, std::move(gates), c, std::move(ct)});
  }
  return cache;
}

Eigen::RowVectorXd head(const LstmWeights& w, const MatrixXd& top_hidden) {
  Eigen::RowVectorXd y = w.head_weights.transpose() * top_hidden;
  y.array() += w.head_bias(0);
  return y;
}

}  // namespace

LstmWeights LstmWeights::zeros(std::size_t input_dim, std::span<const std::size_t> hidden_dims) {
  LstmWeights w;
  std::size_t in = input_dim;
  for (const std::size_t h : hidden_dims) {
    const auto hi = static_cast<Index>(h);
    w.layers.push_back({MatrixXd::Zero(4 * hi, static_cast<Index>(in) + hi), Eigen::VectorXd::Zero(4 * hi)});
    in = h;
  }
  w.head_weights = Eigen::VectorXd::Zero(static_cast<Index>(in));
  w.head_bias = Eigen::VectorXd::Zero(1);
  return w;
}

LstmWeights LstmWeights::uniform_init(std::size_t input_dim, std::span<const std::size_t> hidden_dims, Rng& rng) {
  LstmWeights w = zeros(input_dim, hidden_dims);
  const auto fill = [&rng](double* data, Index n, double bound) {
    for (Index k = 0; k < n; ++k) data[k] = rng.uniform(-bound, bound);
  };
  for (auto& layer : w.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
    fill(layer.weights.data(), layer.weights.size(), bound);
    fill(layer.bias.data(), layer.bias.size(), bound);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(w.head_weights.size()));
  fill(w.head_weights.data(), w.head_weights.size(), bound);
  fill(w.head_bias.data(), 1, bound);
  return w;
}

std::vector<std::size_t> LstmWeights::hidden_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& l : layers) dims.push_back(l.hidden_dim());
  return dims;
}

std::size_t LstmWeights::parameter_count() const noexcept {
  std::size_t n = static_cast<std::size_t>(head_weights.size() + head_bias.size());
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool LstmWeights::all_finite() const noexcept {
  for (const auto& l : layers)
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  return head_weights.allFinite() && head_bias.allFinite();
}

std::vector<std::span<double>> parameter_views(LstmWeights& w) {
  std::vector<std::span<double>> views;
  for (auto& l : w.layers) {
    views.emplace_back(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
    views.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
  }
  views.emplace_back(w.head_weights.data(), static_cast<std::size_t>(w.head_weights.size()));
  views.emplace_back(w.head_bias.data(), static_cast<std::size_t>(w.head_bias.size()));
  return views;
}

std::vector<std::span<const double>> parameter_views(const LstmWeights& w) {
  std::vector<std::span<const double>> views;
  for (auto v : parameter_views(const_cast<LstmWeights&>(w))) views.emplace_back(v.data(), v.size());
  return views;
}

Eigen::RowVectorXd lstm_forward_batch(const LstmWeights& w, const SequenceBatch& steps) {
  check_dims(w, steps);
  std::vector<MatrixXd> current = steps;
  for (const auto& layer : w.layers) current = forward_layer(layer, current, false).hidden;
  return head(w, current.back());
}

double lstm_forward(const LstmWeights& w, const Eigen::MatrixXd& window) {
  SequenceBatch steps;
  steps.reserve(static_cast<std::size_t>(window.rows()));
  for (Index t = 0; t < window.rows(); ++t) steps.emplace_back(window.row(t).transpose());
  return lstm_forward_batch(w, steps)(0);
}

double mae_loss(const LstmWeights& w, const SequenceBatch& steps, const Eigen::RowVectorXd& targets) {
  const auto y = lstm_forward_batch(w, steps);
  return (y - targets).cwiseAbs().mean();
}

double mae_loss_and_gradients(const LstmWeights& w, const SequenceBatch& steps,
                              const Eigen::RowVectorXd& targets, LstmWeights& grads) {
  check_dims(w, steps);
  const Index batch = steps.front().cols();
  if (targets.size() != batch) throw Error(Errc::DimensionMismatch, "target count does not match batch size");
  const std::size_t n_layers = w.layers.size();
  const std::size_t n_steps = steps.size();

  std::vector<LayerCache> caches;
  caches.reserve(n_layers);
  const std::vector<MatrixXd>* inputs = &steps;
  for (const auto& layer : w.layers) {
    caches.push_back(forward_layer(layer, *inputs, true));
    inputs = &caches.back().hidden;
  }
  const MatrixXd& top = caches.back().hidden.back();
  const Eigen::RowVectorXd residual = head(w, top) - targets;
  const double loss = residual.cwiseAbs().mean();

  grads = LstmWeights::zeros(w.input_dim(), w.hidden_dims());
  const Eigen::RowVectorXd dy = residual.unaryExpr([](double r) { return r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0); }) /
                                static_cast<double>(batch);
  grads.head_weights.noalias() = top * dy.transpose();
  grads.head_bias(0) = dy.sum();

  // Gradient arriving at each layer's hidden output per time step.
  std::vector<MatrixXd> dh_above(n_steps);
  dh_above.back() = w.head_weights * dy;

  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = w.layers[li];
    const auto& cache = caches[li];
    auto& g = grads.layers[li];
    const Index hdim = static_cast<Index>(layer.hidden_dim());
    const Index in = static_cast<Index>(layer.input_dim());

    std::vector<MatrixXd> dx(n_steps);
    MatrixXd dh_next = MatrixXd::Zero(hdim, batch);
    MatrixXd dc_next = MatrixXd::Zero(hdim, batch);
    MatrixXd dz(4 * hdim, batch);
    MatrixXd dstacked(in + hdim, batch);
    for (std::size_t t = n_steps; t-- > 0;) {
      const auto& sc = cache.steps[t];
      MatrixXd dh = dh_next;
      if (dh_above[t].size() != 0) dh += dh_above[t];

      const auto i_g = sc.gates.topRows(hdim).array();
      const auto f_g = sc.gates.middleRows(hdim, hdim).array();
      const auto g_g = sc.gates.middleRows(2 * hdim, hdim).array();
      const auto o_g = sc.gates.bottomRows(hdim).array();
      const auto ct = sc.cell_tanh.array();

      const Eigen::ArrayXXd d_o = dh.array() * ct;
      const Eigen::ArrayXXd dc = dc_next.array() + dh.array() * o_g * (1.0 - ct.square());
      Eigen::ArrayXXd c_prev;
      if (t > 0)
        c_prev = cache.steps[t - 1].cell.array();
      else
        c_prev = Eigen::ArrayXXd::Zero(hdim, batch);

      dz.topRows(hdim) = (dc * g_g * i_g * (1.0 - i_g)).matrix();
      dz.middleRows(hdim, hdim) = (dc * c_prev * f_g * (1.0 - f_g)).matrix();
      dz.middleRows(2 * hdim, hdim) = (dc * i_g * (1.0 - g_g.square())).matrix();
      dz.bottomRows(hdim) = (d_o * o_g * (1.0 - o_g)).matrix();
      dc_next = (dc * f_g).matrix();

      g.weights.noalias() += dz * sc.stacked.transpose();
      g.bias += dz.rowwise().sum();
      dstacked.noalias() = layer.weights.transpose() * dz;
      dh_next = dstacked.bottomRows(hdim);
      if (li > 0) dx[t] = dstacked.topRows(in);
    }
    dh_above = std::move(dx);
  }
  return loss;
}

void AdamOptimizer::step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size()) throw Error(Errc::DimensionMismatch, "parameter/gradient tensor count mismatch");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw Error(Errc::DimensionMismatch, "optimizer state does not match parameters");
  ++t_;
  const double correction1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    auto g = grads[k];
    if (p.size() != g.size() || p.size() != m_[k].size())
      throw Error(Errc::DimensionMismatch, "tensor size mismatch in optimizer step");
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }
}

}  // namespace gnssguard
