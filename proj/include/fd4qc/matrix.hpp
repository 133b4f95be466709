#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fd4qc/error.hpp"
#include "fd4qc/ingest.hpp"

namespace fd4qc {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw Error(Errc::DimensionMismatch, "ragged rows");
      std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Dataset {
  Matrix x;
  std::vector<int> y;
};

inline Dataset to_dataset(const std::vector<LabeledRow>& rows) {
  Dataset d;
  d.x = Matrix(rows.size(), rows.empty() ? 0 : rows.front().features.size());
  d.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].features.size() != d.x.cols()) throw Error(Errc::DimensionMismatch, "ragged feature rows");
    std::copy(rows[i].features.begin(), rows[i].features.end(), d.x.row(i).begin());
    d.y.push_back(rows[i].label);
  }
  return d;
}

inline void check_fit_inputs(const Matrix& x, const std::vector<int>& y) {
  if (x.empty()) throw Error(Errc::DimensionMismatch, "no training rows");
  if (y.size() != x.rows()) throw Error(Errc::DimensionMismatch, "label count differs from row count");
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(Errc::BadLabel, "labels must be 0 or 1");
  }
}

inline bool has_both_classes(const std::vector<int>& y) {
  bool pos = false, neg = false;
  for (int v : y) (v ? pos : neg) = true;
  return pos && neg;
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Per-column (mean, std) with constant columns mapped to std 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    s.mean.assign(x.cols(), 0.0);
    s.std.assign(x.cols(), 0.0);
    const double n = static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] += x(r, c);
    }
    for (auto& m : s.mean) m /= n;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double d = x(r, c) - s.mean[c];
        s.std[c] += d * d;
      }
    }
    for (auto& v : s.std) {
      v = std::sqrt(v / n);
      if (!(v > 1e-12)) v = 1.0;
    }
    return s;
  }

  std::size_t width() const { return mean.size(); }

  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t c = 0; c < mean.size(); ++c) out[c] = (in[c] - mean[c]) / std[c];
  }

  Matrix apply(const Matrix& x) const {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) apply(x.row(r), out.row(r));
    return out;
  }

  bool operator==(const Standardizer&) const = default;
};

}  // namespace fd4qc
