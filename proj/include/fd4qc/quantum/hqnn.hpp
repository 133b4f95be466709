#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "fd4qc/optim.hpp"
#include "fd4qc/quantum/gradient.hpp"

namespace fd4qc::quantum {

struct HqnnConfig {
  int qubits = 4;
  int layers = 1;
  /// number of affine + tanh layers in the classical encoder (first d -> q, then q -> q)
  int encoder_depth = 1;
  int epochs = 30;
  std::size_t batch = 32;
  double learning_rate = 0.01;
  std::uint64_t seed = 7;
};

struct DenseLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;

  bool operator==(const DenseLayer&) const = default;
};

/**
 * Hybrid network: standardized input -> tanh encoder -> angles pi (t + 1) / 2
 * -> angle-encoding feature map + ansatz -> <Z_i> on every qubit -> affine head
 * -> sigmoid.
 */
struct HqnnModel {
  Standardizer standardization;
  std::vector<DenseLayer> encoder;
  Circuit circuit;
  std::vector<double> params;
  std::vector<double> head_weights;
  double head_bias = 0.0;

  int qubits() const { return circuit.n_qubits; }

  /// Intermediate values kept for the backward pass.
  struct Trace {
    std::vector<std::vector<double>> activations;  // [0] = standardized input, [k+1] = tanh of layer k
    std::vector<double> angles;
    std::vector<double> expvals;
    double logit = 0.0;
  };

  Trace forward(std::span<const double> x_raw) const {
    if (x_raw.size() != standardization.width()) throw Error(Errc::WidthMismatch, "HQNN input width mismatch");
    Trace t;
    std::vector<double> h(x_raw.size());
    standardization.apply(x_raw, h);
    t.activations.push_back(h);
    for (const auto& layer : encoder) {
      std::vector<double> out(layer.bias);
      for (std::size_t o = 0; o < out.size(); ++o) {
        const auto w = layer.weights.row(o);
        for (std::size_t i = 0; i < w.size(); ++i) out[o] += w[i] * t.activations.back()[i];
        out[o] = std::tanh(out[o]);
      }
      t.activations.push_back(std::move(out));
    }
    t.angles.resize(t.activations.back().size());
    for (std::size_t i = 0; i < t.angles.size(); ++i) {
      t.angles[i] = std::numbers::pi * (t.activations.back()[i] + 1.0) / 2.0;
    }
    t.expvals = expval_z_all(run_circuit(circuit, params, t.angles));
    t.logit = head_bias;
    for (std::size_t k = 0; k < t.expvals.size(); ++k) t.logit += head_weights[k] * t.expvals[k];
    return t;
  }

  double predict_proba(std::span<const double> x_raw) const { return sigmoid(forward(x_raw).logit); }

  /// All trainable values in a fixed order: encoder layers (weights row-major, then bias),
  /// circuit parameters, head weights, head bias.
  std::vector<double> flatten() const {
    std::vector<double> v;
    for (const auto& l : encoder) {
      v.insert(v.end(), l.weights.data().begin(), l.weights.data().end());
      v.insert(v.end(), l.bias.begin(), l.bias.end());
    }
    v.insert(v.end(), params.begin(), params.end());
    v.insert(v.end(), head_weights.begin(), head_weights.end());
    v.push_back(head_bias);
    return v;
  }

  void unflatten(std::span<const double> v) {
    std::size_t k = 0;
    for (auto& l : encoder) {
      for (std::size_t r = 0; r < l.weights.rows(); ++r) {
        for (auto& w : l.weights.row(r)) w = v[k++];
      }
      for (auto& b : l.bias) b = v[k++];
    }
    for (auto& p : params) p = v[k++];
    for (auto& w : head_weights) w = v[k++];
    head_bias = v[k++];
    if (k != v.size()) throw Error(Errc::DimensionMismatch, "flattened HQNN parameter count mismatch");
  }

  bool operator==(const HqnnModel&) const = default;
};

inline double hqnn_forward(const HqnnModel& m, std::span<const double> x_raw) { return m.predict_proba(x_raw); }

/// Mean binary cross-entropy over `rows` of (x, y) and its gradient in flatten() order.
/// Circuit and encoding-angle derivatives come from the parameter-shift rule; the
/// classical blocks use the exact chain rule.
inline double hqnn_loss_and_grad(const HqnnModel& m, const Matrix& x, const std::vector<int>& y,
                                 std::span<const std::size_t> rows, std::vector<double>* grad) {
  const int q = m.qubits();
  double loss = 0.0;
  std::vector<DenseLayer> g_enc;
  std::vector<double> g_params(m.params.size(), 0.0), g_head(m.head_weights.size(), 0.0);
  double g_bias = 0.0;
  if (grad) {
    for (const auto& l : m.encoder) g_enc.push_back({Matrix(l.weights.rows(), l.weights.cols()), std::vector<double>(l.bias.size(), 0.0)});
  }
  for (auto r : rows) {
    const auto t = m.forward(x.row(r));
    const double z = t.logit;
    loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y[r] * z;
    if (!grad) continue;

    const double dz = sigmoid(z) - y[r];
    g_bias += dz;
    std::vector<double> de(q);
    for (int k = 0; k < q; ++k) {
      g_head[k] += dz * t.expvals[k];
      de[k] = dz * m.head_weights[k];
    }
    const Matrix jp = shift_jacobian(m.circuit, m.params, t.angles, Wrt::Params);
    for (std::size_t j = 0; j < jp.rows(); ++j) {
      for (int k = 0; k < q; ++k) g_params[j] += de[k] * jp(j, k);
    }
    const Matrix jf = shift_jacobian(m.circuit, m.params, t.angles, Wrt::Features);
    // d angle / d tanh = pi / 2; d tanh / d pre = 1 - tanh^2
    std::vector<double> da(q, 0.0);
    for (int i = 0; i < q; ++i) {
      double dphi = 0.0;
      for (int k = 0; k < q; ++k) dphi += de[k] * jf(i, k);
      const double th = t.activations.back()[i];
      da[i] = dphi * std::numbers::pi / 2.0 * (1.0 - th * th);
    }
    for (std::size_t li = m.encoder.size(); li-- > 0;) {
      const auto& layer = m.encoder[li];
      const auto& in = t.activations[li];
      for (std::size_t o = 0; o < da.size(); ++o) {
        auto gw = g_enc[li].weights.row(o);
        for (std::size_t i = 0; i < in.size(); ++i) gw[i] += da[o] * in[i];
        g_enc[li].bias[o] += da[o];
      }
      if (li == 0) break;
      std::vector<double> prev(in.size(), 0.0);
      for (std::size_t o = 0; o < da.size(); ++o) {
        const auto w = layer.weights.row(o);
        for (std::size_t i = 0; i < in.size(); ++i) prev[i] += w[i] * da[o];
      }
      for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= 1.0 - in[i] * in[i];
      da = std::move(prev);
    }
  }
  const double n = static_cast<double>(rows.size());
  if (grad) {
    grad->clear();
    for (const auto& l : g_enc) {
      for (double v : l.weights.data()) grad->push_back(v / n);
      for (double v : l.bias) grad->push_back(v / n);
    }
    for (double v : g_params) grad->push_back(v / n);
    for (double v : g_head) grad->push_back(v / n);
    grad->push_back(g_bias / n);
  }
  return loss / n;
}

/// Fresh model: Xavier-uniform encoder and head, zero biases, circuit angles in (-0.1, 0.1).
inline HqnnModel hqnn_init(std::size_t input_width, const HqnnConfig& cfg, Rng& rng) {
  HqnnModel m;
  const auto q = static_cast<std::size_t>(cfg.qubits);
  std::size_t in = input_width;
  for (int l = 0; l < std::max(1, cfg.encoder_depth); ++l) {
    DenseLayer layer{Matrix(q, in), std::vector<double>(q, 0.0)};
    const double lim = std::sqrt(6.0 / static_cast<double>(in + q));
    for (std::size_t r = 0; r < q; ++r) {
      for (auto& w : layer.weights.row(r)) w = lim * (2.0 * uniform01(rng) - 1.0);
    }
    m.encoder.push_back(std::move(layer));
    in = q;
  }
  m.circuit = feature_map(cfg.qubits, 1);
  m.circuit.append(ansatz(cfg.qubits, cfg.layers));
  m.params.resize(static_cast<std::size_t>(m.circuit.n_params));
  for (auto& p : m.params) p = -0.1 + 0.2 * uniform01(rng);
  const double lim = std::sqrt(6.0 / static_cast<double>(q + 1));
  m.head_weights.resize(q);
  for (auto& w : m.head_weights) w = lim * (2.0 * uniform01(rng) - 1.0);
  return m;
}

inline HqnnModel hqnn_fit(const Matrix& x, const std::vector<int>& y, const HqnnConfig& cfg = {},
                          std::vector<double>* loss_history = nullptr) {
  check_fit_inputs(x, y);
  if (!has_both_classes(y)) throw Error(Errc::SingleClass, "HQNN needs both classes");
  Rng rng(mix_seed(cfg.seed, 0x4B));
  HqnnModel m = hqnn_init(x.cols(), cfg, rng);
  m.standardization = Standardizer::fit(x);

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  auto flat = m.flatten();
  Adam opt(flat.size(), cfg.learning_rate);
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch);
  if (loss_history) loss_history->push_back(hqnn_loss_and_grad(m, x, y, order, nullptr));
  std::vector<double> g;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      hqnn_loss_and_grad(m, x, y, std::span<const std::size_t>(order).subspan(start, len), &g);
      opt.step(flat, g);
      m.unflatten(flat);
    }
    if (loss_history) {
      std::vector<std::size_t> all(x.rows());
      std::iota(all.begin(), all.end(), 0);
      loss_history->push_back(hqnn_loss_and_grad(m, x, y, all, nullptr));
    }
  }
  return m;
}

}  // namespace fd4qc::quantum
