#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "fd4qc/optim.hpp"
#include "fd4qc/quantum/gradient.hpp"
#include "fd4qc/quantum/preprocess.hpp"

namespace fd4qc::quantum {

struct VqcConfig {
  int qubits = 4;
  int layers = 1;
  int epochs = 30;
  std::size_t batch = 32;
  double learning_rate = 0.01;
  std::uint64_t seed = 7;
  /// 0 = exact expectation at inference; otherwise shot-sampled
  int shots = 0;
};

/// Angle-encoding feature map followed by the layered ansatz; p = (1 - <Z_0>) / 2.
struct VqcModel {
  QuantumPreprocessor preprocessor;
  Circuit circuit;
  std::vector<double> params;
  int shots = 0;
  std::uint64_t seed = 7;

  double probability_from_angles(std::span<const double> angles) const {
    const StateVector s = run_circuit(circuit, params, angles);
    double e = 0.0;
    if (shots > 0) {
      Rng rng(seed);
      e = sampled_expval_z_all(s, shots, rng)[0];
    } else {
      e = expval_z(s, 0);
    }
    return std::clamp((1.0 - e) / 2.0, 0.0, 1.0);
  }

  double predict_proba(std::span<const double> x_raw) const {
    return probability_from_angles(preprocessor.transform(x_raw));
  }

  bool operator==(const VqcModel&) const = default;
};

inline Circuit vqc_circuit(int qubits, int layers) {
  Circuit c = feature_map(qubits, 1);
  c.append(ansatz(qubits, layers));
  return c;
}

namespace detail {

inline constexpr double kProbEps = 1e-7;

inline double bce(double p, int y) {
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return y ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace detail

/// Mean binary cross-entropy over already-encoded rows.
inline double vqc_loss(const Circuit& c, std::span<const double> params, const Matrix& angles,
                       const std::vector<int>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < angles.rows(); ++i) {
    const double e = expval_z(run_circuit(c, params, angles.row(i)), 0);
    loss += detail::bce((1.0 - e) / 2.0, y[i]);
  }
  return loss / static_cast<double>(angles.rows());
}

/// d(vqc_loss)/d(params) with the circuit derivative from the parameter-shift rule.
inline std::vector<double> vqc_loss_grad(const Circuit& c, std::span<const double> params, const Matrix& angles,
                                         const std::vector<int>& y, std::span<const std::size_t> rows) {
  std::vector<double> g(params.size(), 0.0);
  for (auto i : rows) {
    const double e = expval_z(run_circuit(c, params, angles.row(i)), 0);
    const double p = std::clamp((1.0 - e) / 2.0, detail::kProbEps, 1.0 - detail::kProbEps);
    const double dl_dp = (p - y[i]) / (p * (1.0 - p));
    const auto de = param_shift_grad(c, params, angles.row(i), 0);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += dl_dp * -0.5 * de[j];
  }
  for (auto& v : g) v /= static_cast<double>(rows.size());
  return g;
}

/// Training loop shared by vqc_fit and callers that supply pre-encoded angles.
inline void fit_vqc_params(const Circuit& c, std::vector<double>& params, const Matrix& angles,
                           const std::vector<int>& y, const VqcConfig& cfg, Rng& rng,
                           std::vector<double>* loss_history) {
  Adam opt(params.size(), cfg.learning_rate);
  std::vector<std::size_t> order(angles.rows());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch);
  if (loss_history) loss_history->push_back(vqc_loss(c, params, angles, y));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const auto g = vqc_loss_grad(c, params, angles, y, std::span<const std::size_t>(order).subspan(start, len));
      opt.step(params, g);
    }
    if (loss_history) loss_history->push_back(vqc_loss(c, params, angles, y));
  }
}

/// Mini-batch Adam on binary cross-entropy. `loss_history` gets the full training loss
/// before the first epoch and after every epoch.
inline VqcModel vqc_fit(const Matrix& x, const std::vector<int>& y, const VqcConfig& cfg = {},
                        std::vector<double>* loss_history = nullptr) {
  check_fit_inputs(x, y);
  if (!has_both_classes(y)) throw Error(Errc::SingleClass, "VQC needs both classes");
  VqcModel m;
  m.shots = cfg.shots;
  m.seed = cfg.seed;
  m.preprocessor = QuantumPreprocessor::fit(x, cfg.qubits);
  m.circuit = vqc_circuit(cfg.qubits, cfg.layers);
  const Matrix angles = m.preprocessor.transform(x);
  Rng rng(mix_seed(cfg.seed, 0x7C));
  m.params.resize(static_cast<std::size_t>(m.circuit.n_params));
  for (auto& p : m.params) p = -0.1 + 0.2 * uniform01(rng);
  fit_vqc_params(m.circuit, m.params, angles, y, cfg, rng, loss_history);
  return m;
}

}  // namespace fd4qc::quantum
