#pragma once

#include <span>
#include <vector>

#include "fd4qc/quantum/kernel.hpp"
#include "fd4qc/quantum/preprocess.hpp"
#include "fd4qc/svm.hpp"

namespace fd4qc::quantum {

struct QsvmConfig {
  int qubits = 4;
  int repetitions = 1;
  double C = 1.0;
  double tol = 1e-3;
  int shots = 0;
  std::uint64_t seed = 7;
};

/// Fidelity-kernel SVM. Support vectors are stored in the preprocessed angle space.
struct QsvmModel {
  QuantumPreprocessor preprocessor;
  FeatureMapConfig map;
  Matrix support_vectors;
  std::vector<double> dual_coefficients;
  double bias = 0.0;
  double C = 1.0;
  double platt_slope = 1.0;

  double decision(std::span<const double> x_raw) const {
    const auto z = preprocessor.transform(x_raw);
    Rng rng(map.seed);
    const auto row = kernel_row(z, support_vectors, map, map.shots > 0 ? &rng : nullptr);
    double f = bias;
    for (std::size_t k = 0; k < row.size(); ++k) f += dual_coefficients[k] * row[k];
    return f;
  }

  double predict_proba(std::span<const double> x_raw) const { return sigmoid(platt_slope * decision(x_raw)); }

  bool operator==(const QsvmModel&) const = default;
};

inline QsvmModel qsvm_fit(const Matrix& x, const std::vector<int>& y, const QsvmConfig& cfg = {}) {
  check_fit_inputs(x, y);
  if (!has_both_classes(y)) throw Error(Errc::SingleClass, "QSVM needs both classes");
  QsvmModel m;
  m.map = FeatureMapConfig{cfg.qubits, cfg.repetitions, cfg.shots, cfg.seed};
  m.preprocessor = QuantumPreprocessor::fit(x, cfg.qubits);
  const Matrix z = m.preprocessor.transform(x);
  const Matrix k = kernel_matrix(z, m.map);
  const SvmModel svm = smo_solve(k, to_signed_labels(y), SmoConfig{cfg.C, cfg.tol, 0});
  m.C = cfg.C;
  m.bias = svm.bias;
  m.dual_coefficients = svm.dual_coefficients;
  m.support_vectors = Matrix(svm.support_indices.size(), z.cols());
  for (std::size_t s = 0; s < svm.support_indices.size(); ++s) {
    const auto src = z.row(svm.support_indices[s]);
    std::copy(src.begin(), src.end(), m.support_vectors.row(s).begin());
  }
  std::vector<double> f(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = svm.bias;
    for (std::size_t s = 0; s < svm.support_indices.size(); ++s) {
      v += svm.dual_coefficients[s] * k(i, svm.support_indices[s]);
    }
    f[i] = v;
  }
  m.platt_slope = fit_platt_slope(f, y);
  return m;
}

}  // namespace fd4qc::quantum
