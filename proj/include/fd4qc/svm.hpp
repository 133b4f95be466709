#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "fd4qc/matrix.hpp"

namespace fd4qc {

struct SmoConfig {
  double C = 1.0;
  /// stop once the maximal KKT violating pair gap falls below tol
  double tol = 1e-3;
  std::size_t max_iter = 0;  // 0 selects max(10^6, 100 n)
};

/// Soft-margin SVM dual solution over a precomputed kernel.
struct SvmModel {
  std::vector<double> alpha;                 // one per training row
  std::vector<std::size_t> support_indices;  // rows with alpha > 0
  std::vector<double> dual_coefficients;     // alpha_i * y_i for each support row
  double bias = 0.0;
  double C = 1.0;
  double objective = 0.0;  // 1/2 a'Qa - sum(a) at the solution
  std::size_t iterations = 0;

  /// `kernel_row[k]` = k(support_k, x)
  double decision(std::span<const double> kernel_row) const {
    double f = bias;
    for (std::size_t k = 0; k < dual_coefficients.size(); ++k) f += dual_coefficients[k] * kernel_row[k];
    return f;
  }

  bool operator==(const SvmModel&) const = default;
};

/// 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij.
inline double svm_dual_objective(const Matrix& k, const std::vector<int>& y, const std::vector<double>& alpha) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    lin += alpha[i];
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < alpha.size(); ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * k(i, j);
  }
  return 0.5 * quad - lin;
}

/**
 * Sequential minimal optimization with second-order working-set selection
 * (maximal violating i, then j minimizing the clipped quadratic model).
 *
 * Gradient G = Q alpha - e is maintained incrementally. Each step moves
 * alpha_i by +y_i t and alpha_j by -y_j t, which keeps sum(alpha y) fixed.
 * Bias = mean of -y_i G_i over free multipliers, or the midpoint of the
 * feasible interval when none are free.
 */
inline SvmModel smo_solve(const Matrix& k, const std::vector<int>& y, const SmoConfig& cfg = {}) {
  const std::size_t n = y.size();
  if (k.rows() != n || k.cols() != n) throw Error(Errc::DimensionMismatch, "kernel must be n x n for n labels");
  for (int v : y) {
    if (v != 1 && v != -1) throw Error(Errc::BadLabel, "SVM labels must be -1 or +1");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(k(i, j))) throw Error(Errc::NonFinite, "kernel entry is not finite");
      if (std::abs(k(i, j) - k(j, i)) > 1e-9 * (1.0 + std::abs(k(i, j)))) {
        throw Error(Errc::NotSymmetric, "kernel matrix is not symmetric");
      }
    }
  }
  if (!(cfg.C > 0.0)) throw Error(Errc::BadConfig, "C must be positive");
  if (std::find(y.begin(), y.end(), 1) == y.end() || std::find(y.begin(), y.end(), -1) == y.end()) {
    throw Error(Errc::SingleClass, "SVM needs both classes");
  }

  const double c = cfg.C;
  constexpr double tau = 1e-12;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0.0); };

  const std::size_t max_iter = cfg.max_iter ? cfg.max_iter : std::max<std::size_t>(1000000, 100 * n);
  std::size_t iter = 0;
  double gmax = -std::numeric_limits<double>::infinity();
  double gmin = std::numeric_limits<double>::infinity();
  for (; iter < max_iter; ++iter) {
    gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    gmin = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n || v >= gmax) continue;
      const double b = gmax - v;
      double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
      if (a <= 0.0) a = tau;
      const double obj = -(b * b) / a;
      if (obj < best) {
        best = obj;
        j = t;
      }
    }
    if (i == n || j == n || gmax - gmin < cfg.tol) break;

    double a = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (a <= 0.0) a = tau;
    const double b = -y[i] * grad[i] + y[j] * grad[j];
    const double bound_i = y[i] == 1 ? c - alpha[i] : alpha[i];
    const double bound_j = y[j] == 1 ? alpha[j] : c - alpha[j];
    double step = b / a;
    bool clip_i = false, clip_j = false;
    if (step >= bound_i) {
      step = bound_i;
      clip_i = true;
    }
    if (step >= bound_j) {
      step = bound_j;
      clip_j = true;
      clip_i = bound_i == bound_j;
    }
    const double old_i = alpha[i], old_j = alpha[j];
    alpha[i] += y[i] * step;
    alpha[j] -= y[j] * step;
    if (clip_i) alpha[i] = y[i] == 1 ? c : 0.0;
    if (clip_j) alpha[j] = y[j] == 1 ? 0.0 : c;
    const double di = (alpha[i] - old_i) * y[i];
    const double dj = (alpha[j] - old_j) * y[j];
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (k(t, i) * di + k(t, j) * dj);
  }

  SvmModel m;
  m.C = c;
  m.iterations = iter;
  double sum = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0 && alpha[t] < c) {
      sum += -y[t] * grad[t];
      ++n_free;
    }
  }
  if (n_free > 0) {
    m.bias = sum / static_cast<double>(n_free);
  } else {
    double up = -std::numeric_limits<double>::infinity(), low = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t)) up = std::max(up, -y[t] * grad[t]);
      if (in_low(t)) low = std::min(low, -y[t] * grad[t]);
    }
    if (std::isfinite(up) && std::isfinite(low)) {
      m.bias = (up + low) / 2.0;
    } else {
      m.bias = std::isfinite(up) ? up : (std::isfinite(low) ? low : 0.0);
    }
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      m.support_indices.push_back(t);
      m.dual_coefficients.push_back(alpha[t] * y[t]);
    }
  }
  m.objective = svm_dual_objective(k, y, alpha);
  m.alpha = std::move(alpha);
  return m;
}

/// Maps {0,1} labels to {-1,+1}.
inline std::vector<int> to_signed_labels(const std::vector<int>& y) {
  std::vector<int> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s[i] = y[i] ? 1 : -1;
  return s;
}

/**
 * One-parameter Platt scaling p = sigmoid(a f), a > 0, fitted by Newton's method on
 * the log-loss with Platt's smoothed targets. p >= 0.5 exactly when f >= 0.
 */
inline double fit_platt_slope(const std::vector<double>& decision, const std::vector<int>& y01) {
  double n_pos = 0.0, n_neg = 0.0;
  for (int v : y01) (v ? n_pos : n_neg) += 1.0;
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);
  double a = 1.0;
  for (int it = 0; it < 100; ++it) {
    double g = 0.0, h = 0.0;
    for (std::size_t i = 0; i < decision.size(); ++i) {
      const double p = sigmoid(a * decision[i]);
      const double t = y01[i] ? t_pos : t_neg;
      g += (p - t) * decision[i];
      h += p * (1.0 - p) * decision[i] * decision[i];
    }
    if (h < 1e-12) break;
    const double next = std::clamp(a - g / h, 1e-3, 1e3);
    const bool done = std::abs(next - a) < 1e-10 * std::max(1.0, a);
    a = next;
    if (done) break;
  }
  return a;
}

}  // namespace fd4qc
