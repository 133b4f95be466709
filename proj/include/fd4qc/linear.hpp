#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fd4qc/matrix.hpp"

namespace fd4qc {

struct LrConfig {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
};

/// Logistic regression over standardized inputs.
struct LinearModel {
  Standardizer standardization;
  std::vector<double> weights;
  double intercept = 0.0;

  bool operator==(const LinearModel&) const = default;
};

/// Mean logistic loss + l2 * |w|^2 / 2 (intercept unpenalized), on already-standardized inputs.
inline double lr_objective(std::span<const double> w, double b, const Matrix& xs, const std::vector<int>& y,
                           double l2) {
  double loss = 0.0;
  for (std::size_t r = 0; r < xs.rows(); ++r) {
    double z = b;
    const auto row = xs.row(r);
    for (std::size_t c = 0; c < w.size(); ++c) z += w[c] * row[c];
    // log(1 + e^z) - y z, evaluated stably
    loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y[r] * z;
  }
  loss /= static_cast<double>(xs.rows());
  double reg = 0.0;
  for (double v : w) reg += v * v;
  return loss + 0.5 * l2 * reg;
}

/// Gradient of lr_objective; the last element is d/d(intercept).
inline std::vector<double> lr_gradient(std::span<const double> w, double b, const Matrix& xs,
                                       const std::vector<int>& y, double l2) {
  std::vector<double> g(w.size() + 1, 0.0);
  for (std::size_t r = 0; r < xs.rows(); ++r) {
    double z = b;
    const auto row = xs.row(r);
    for (std::size_t c = 0; c < w.size(); ++c) z += w[c] * row[c];
    const double err = sigmoid(z) - y[r];
    for (std::size_t c = 0; c < w.size(); ++c) g[c] += err * row[c];
    g.back() += err;
  }
  const double n = static_cast<double>(xs.rows());
  for (auto& v : g) v /= n;
  for (std::size_t c = 0; c < w.size(); ++c) g[c] += l2 * w[c];
  return g;
}

/// Full-batch gradient descent from zero. `loss_history`, when given, receives the
/// objective before every epoch and once after the last.
inline LinearModel lr_fit(const Matrix& x, const std::vector<int>& y, const LrConfig& cfg = {},
                          std::vector<double>* loss_history = nullptr) {
  check_fit_inputs(x, y);
  LinearModel m;
  m.standardization = Standardizer::fit(x);
  const Matrix xs = m.standardization.apply(x);
  m.weights.assign(x.cols(), 0.0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (loss_history) loss_history->push_back(lr_objective(m.weights, m.intercept, xs, y, cfg.l2));
    const auto g = lr_gradient(m.weights, m.intercept, xs, y, cfg.l2);
    for (std::size_t c = 0; c < m.weights.size(); ++c) m.weights[c] -= cfg.learning_rate * g[c];
    m.intercept -= cfg.learning_rate * g.back();
  }
  if (loss_history) loss_history->push_back(lr_objective(m.weights, m.intercept, xs, y, cfg.l2));
  return m;
}

inline double lr_predict_proba(const LinearModel& m, std::span<const double> x) {
  if (x.size() != m.weights.size()) throw Error(Errc::DimensionMismatch, "input width differs from model");
  double z = m.intercept;
  for (std::size_t c = 0; c < x.size(); ++c) {
    z += m.weights[c] * (x[c] - m.standardization.mean[c]) / m.standardization.std[c];
  }
  return sigmoid(z);
}

}  // namespace fd4qc
