#pragma once

#include <span>
#include <vector>

#include "fd4qc/matrix.hpp"
#include "fd4qc/quantum/circuit.hpp"

namespace fd4qc::quantum {

struct FeatureMapConfig {
  int qubits = 4;
  int repetitions = 1;
  /// 0 = exact overlap; otherwise estimate P(|0...0>) from this many shots
  int shots = 0;
  std::uint64_t seed = 7;

  bool operator==(const FeatureMapConfig&) const = default;
};

/// Compute-uncompute circuit U(z)^dagger U(x): features [0, q) are x, [q, 2q) are z.
/// The probability of reading |0...0> equals |<psi(z)|psi(x)>|^2.
inline Circuit fidelity_circuit(const FeatureMapConfig& cfg) {
  Circuit c = feature_map(cfg.qubits, cfg.repetitions, 0);
  c.append(inverse(feature_map(cfg.qubits, cfg.repetitions, cfg.qubits)));
  return c;
}

namespace detail {

class FidelityEvaluator {
 public:
  explicit FidelityEvaluator(const FeatureMapConfig& cfg)
      : cfg_(cfg), circuit_(fidelity_circuit(cfg)), buf_(2 * static_cast<std::size_t>(cfg.qubits)) {}

  double operator()(std::span<const double> x, std::span<const double> z, Rng* rng = nullptr) {
    const auto q = static_cast<std::size_t>(cfg_.qubits);
    if (x.size() != q || z.size() != q) {
      throw Error(Errc::WidthMismatch, "kernel inputs must have one angle per qubit");
    }
    std::copy(x.begin(), x.end(), buf_.begin());
    std::copy(z.begin(), z.end(), buf_.begin() + static_cast<std::ptrdiff_t>(q));
    const StateVector s = run_circuit(circuit_, {}, buf_);
    if (cfg_.shots <= 0 || rng == nullptr) return s.probability(0);
    std::size_t zeros = 0;
    for (auto b : sample_basis(s, cfg_.shots, *rng)) zeros += b == 0;
    return static_cast<double>(zeros) / cfg_.shots;
  }

 private:
  FeatureMapConfig cfg_;
  Circuit circuit_;
  std::vector<double> buf_;
};

}  // namespace detail

/// k(x, z) = |<psi(z)|psi(x)>|^2 for the angle-encoding feature map.
inline double kernel_value(std::span<const double> x, std::span<const double> z, const FeatureMapConfig& cfg) {
  detail::FidelityEvaluator eval(cfg);
  Rng rng(cfg.seed);
  return eval(x, z, &rng);
}

/// Symmetric Gram matrix over the rows of `x`; the upper triangle is evaluated and mirrored.
inline Matrix kernel_matrix(const Matrix& x, const FeatureMapConfig& cfg) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  detail::FidelityEvaluator eval(cfg);
  Rng rng(cfg.seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = eval(x.row(i), x.row(j), &rng);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

/// k(x, b_j) for every row b_j of `basis`.
inline std::vector<double> kernel_row(std::span<const double> x, const Matrix& basis, const FeatureMapConfig& cfg,
                                      Rng* rng = nullptr) {
  detail::FidelityEvaluator eval(cfg);
  std::vector<double> row(basis.rows());
  for (std::size_t j = 0; j < basis.rows(); ++j) row[j] = eval(x, basis.row(j), rng);
  return row;
}

}  // namespace fd4qc::quantum
