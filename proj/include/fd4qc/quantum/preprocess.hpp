#pragma once

#include <algorithm>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fd4qc/matrix.hpp"

namespace fd4qc::quantum {

/**
 * Classical front end for the qubit register: standardize, project onto the
 * leading principal components, min-max scale each component to [0, pi].
 *
 * Components are ordered by decreasing variance; each eigenvector's sign is
 * fixed so that its largest-magnitude entry is positive, which makes the fit
 * deterministic. Components past the data rank (or with zero range) map to 0.
 * Out-of-range inputs at inference are clipped to [0, pi].
 */
struct QuantumPreprocessor {
  Standardizer standardization;
  Matrix projection;  // q x d
  std::vector<double> lo, hi;

  static QuantumPreprocessor fit(const Matrix& x, int q) {
    if (x.empty()) throw Error(Errc::DimensionMismatch, "preprocessor needs training rows");
    QuantumPreprocessor p;
    p.standardization = Standardizer::fit(x);
    const Matrix xs = p.standardization.apply(x);
    const auto d = static_cast<Eigen::Index>(x.cols());
    const auto n = static_cast<Eigen::Index>(x.rows());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index r = 0; r < n; ++r) {
      Eigen::Map<const Eigen::VectorXd> row(xs.row(static_cast<std::size_t>(r)).data(), d);
      cov.noalias() += row * row.transpose();
    }
    cov /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    p.projection = Matrix(static_cast<std::size_t>(q), x.cols());
    for (int k = 0; k < q && k < d; ++k) {
      Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - k);  // ascending eigenvalues
      if (eig.eigenvalues()(d - 1 - k) <= 1e-12) continue;
      Eigen::Index arg = 0;
      v.cwiseAbs().maxCoeff(&arg);
      if (v(arg) < 0) v = -v;
      for (Eigen::Index c = 0; c < d; ++c) p.projection(static_cast<std::size_t>(k), static_cast<std::size_t>(c)) = v(c);
    }
    p.lo.assign(q, 0.0);
    p.hi.assign(q, 0.0);
    std::vector<double> z(static_cast<std::size_t>(q));
    for (std::size_t r = 0; r < x.rows(); ++r) {
      p.project(xs.row(r), z);
      for (int k = 0; k < q; ++k) {
        if (r == 0 || z[k] < p.lo[k]) p.lo[k] = z[k];
        if (r == 0 || z[k] > p.hi[k]) p.hi[k] = z[k];
      }
    }
    return p;
  }

  int qubits() const { return static_cast<int>(projection.rows()); }
  std::size_t input_width() const { return standardization.width(); }

  std::vector<double> transform(std::span<const double> x) const {
    if (x.size() != input_width()) throw Error(Errc::DimensionMismatch, "preprocessor input width mismatch");
    std::vector<double> xs(x.size());
    standardization.apply(x, xs);
    std::vector<double> z(static_cast<std::size_t>(qubits()));
    project(xs, z);
    for (std::size_t k = 0; k < z.size(); ++k) {
      const double range = hi[k] - lo[k];
      z[k] = range > 1e-12 ? std::clamp((z[k] - lo[k]) / range, 0.0, 1.0) * std::numbers::pi : 0.0;
    }
    return z;
  }

  Matrix transform(const Matrix& x) const {
    Matrix out(x.rows(), static_cast<std::size_t>(qubits()));
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto z = transform(x.row(r));
      std::copy(z.begin(), z.end(), out.row(r).begin());
    }
    return out;
  }

  bool operator==(const QuantumPreprocessor&) const = default;

 private:
  void project(std::span<const double> xs, std::span<double> z) const {
    for (std::size_t k = 0; k < projection.rows(); ++k) {
      double s = 0.0;
      const auto w = projection.row(k);
      for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * xs[c];
      z[k] = s;
    }
  }
};

}  // namespace fd4qc::quantum
