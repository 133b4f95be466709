#pragma once
// Independent reference computations used by the unit and acceptance tests.
// None of these reuse library code paths they are meant to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fd4qc/quantum/circuit.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Statistics

struct BatchStats {
  double mean = 0.0;
  double std = 0.0;  // sample
  double max = 0.0;
  double min = 0.0;
};

/// Two-pass mean and sample deviation.
inline BatchStats two_pass(const std::vector<double>& xs) {
  BatchStats s;
  if (xs.empty()) return s;
  long double sum = 0.0L;
  for (double x : xs) sum += x;
  s.mean = static_cast<double>(sum / xs.size());
  long double ss = 0.0L;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = xs.size() < 2 ? 0.0 : std::sqrt(static_cast<double>(ss / (xs.size() - 1)));
  s.max = *std::max_element(xs.begin(), xs.end());
  s.min = *std::min_element(xs.begin(), xs.end());
  return s;
}

inline double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Metrics

struct Counts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

/// One pass per cell, no branching shared with the library.
inline Counts naive_counts(const std::vector<int>& y, const std::vector<int>& p) {
  Counts c;
  for (std::size_t i = 0; i < y.size(); ++i) c.tp += (y[i] == 1 && p[i] == 1);
  for (std::size_t i = 0; i < y.size(); ++i) c.fp += (y[i] == 0 && p[i] == 1);
  for (std::size_t i = 0; i < y.size(); ++i) c.tn += (y[i] == 0 && p[i] == 0);
  for (std::size_t i = 0; i < y.size(); ++i) c.fn += (y[i] == 1 && p[i] == 0);
  return c;
}

// ---------------------------------------------------------------------------
// Quantum: full 2^n x 2^n unitaries from Kronecker products

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline Mat single_qubit_matrix(fd4qc::quantum::GateKind kind, double theta) {
  using C = std::complex<double>;
  using fd4qc::quantum::GateKind;
  const C i(0.0, 1.0);
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat m(2, 2);
  switch (kind) {
    case GateKind::RX: m << c, -i * s, -i * s, c; break;
    case GateKind::RY: m << c, -s, s, c; break;
    case GateKind::RZ: m << std::exp(-i * theta / 2.0), 0, 0, std::exp(i * theta / 2.0); break;
    case GateKind::H: m << 1, 1, 1, -1; m /= std::sqrt(2.0); break;
    default: break;
  }
  return m;
}

/// Little-endian: qubit 0 is the rightmost Kronecker factor.
inline Mat embed_single(const Mat& u, int target, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) out = kron(out, q == target ? u : Mat(Mat::Identity(2, 2)));
  return out;
}

/// CNOT = |0><0|_c (x) I + |1><1|_c (x) X_t, assembled from projectors.
inline Mat embed_cnot(int control, int target, int n) {
  Mat p0(2, 2), p1(2, 2), x(2, 2), id = Mat::Identity(2, 2);
  p0 << 1, 0, 0, 0;
  p1 << 0, 0, 0, 1;
  x << 0, 1, 1, 0;
  Mat a = Mat::Identity(1, 1), b = Mat::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) {
    a = kron(a, q == control ? p0 : id);
    b = kron(b, q == control ? p1 : (q == target ? x : id));
  }
  return a + b;
}

inline Mat circuit_unitary(const fd4qc::quantum::Circuit& c, const std::vector<double>& params,
                           const std::vector<double>& features) {
  using fd4qc::quantum::GateKind;
  const int n = c.n_qubits;
  Mat u = Mat::Identity(Eigen::Index{1} << n, Eigen::Index{1} << n);
  for (const auto& g : c.gates) {
    Mat gm;
    if (g.kind == GateKind::CNOT) {
      gm = embed_cnot(g.control, g.target, n);
    } else {
      const double theta = g.angle ? g.angle->resolve(params, features) : 0.0;
      gm = embed_single(single_qubit_matrix(g.kind, theta), g.target, n);
    }
    u = gm * u;
  }
  return u;
}

inline Vec oracle_state(const fd4qc::quantum::Circuit& c, const std::vector<double>& params,
                        const std::vector<double>& features) {
  return circuit_unitary(c, params, features).col(0);
}

inline double oracle_expval_z(const Vec& psi, int qubit) {
  double e = 0.0;
  for (Eigen::Index b = 0; b < psi.size(); ++b) e += std::norm(psi(b)) * (((b >> qubit) & 1) ? -1.0 : 1.0);
  return e;
}

/// Random circuit over {RX, RY, RZ, H, CNOT}; rotations bind fresh params, features or fixed angles.
inline fd4qc::quantum::Circuit random_circuit(int n, int n_gates, std::mt19937_64& rng, int n_params = 0,
                                              int n_features = 0) {
  using namespace fd4qc::quantum;
  Circuit c;
  c.n_qubits = n;
  std::uniform_int_distribution<int> kind_d(0, n > 1 ? 4 : 3), q_d(0, n - 1);
  std::uniform_real_distribution<double> ang(-3.0, 3.0), coeff(-1.5, 1.5);
  for (int k = 0; k < n_gates; ++k) {
    const int kind = kind_d(rng);
    const int t = q_d(rng);
    if (kind == 4) {
      int ctl = q_d(rng);
      while (ctl == t) ctl = q_d(rng);
      c.add(Gate::cnot(ctl, t));
    } else if (kind == 3) {
      c.add(Gate::h(t));
    } else {
      AngleSource a = AngleSource::fixed(ang(rng));
      std::uniform_int_distribution<int> pick(0, 2);
      const int which = pick(rng);
      if (which == 1 && n_params > 0) a = AngleSource::param(std::uniform_int_distribution<int>(0, n_params - 1)(rng), coeff(rng));
      if (which == 2 && n_features > 0) {
        a = AngleSource::feature(std::uniform_int_distribution<int>(0, n_features - 1)(rng), coeff(rng));
      }
      c.add(Gate{static_cast<GateKind>(kind), t, -1, a});
    }
  }
  // keep declared widths even when a random draw left some index unbound
  c.n_params = std::max(c.n_params, n_params);
  c.n_features = std::max(c.n_features, n_features);
  return c;
}

// ---------------------------------------------------------------------------
// Linear algebra / calculus

inline double min_eigenvalue(const std::vector<std::vector<double>>& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m[i][j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

/// Central differences of f at x with step h.
inline std::vector<double> finite_diff(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-4) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double up = f(x);
    x[i] = x0 - h;
    const double down = f(x);
    x[i] = x0;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Trees

inline double gini(double pos, double n) {
  if (n <= 0) return 0.0;
  const double p = pos / n;
  return 2.0 * p * (1.0 - p);
}

struct BestSplit {
  int feature = -1;
  double threshold = 0.0;
  double gain = -1.0;
};

/// Exhaustive weighted-Gini decrease over every (feature, midpoint) pair; ties keep the
/// lowest feature then the lowest threshold.
inline BestSplit brute_force_gini(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                  std::size_t min_leaf = 1) {
  const double n = static_cast<double>(y.size());
  double pos = 0;
  for (int v : y) pos += v;
  const double parent = gini(pos, n);
  BestSplit best;
  for (std::size_t f = 0; f < x.front().size(); ++f) {
    std::vector<double> vals;
    for (const auto& r : x) vals.push_back(r[f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double thr = (vals[k] + vals[k + 1]) / 2.0;
      double nl = 0, pl = 0;
      for (std::size_t r = 0; r < x.size(); ++r) {
        if (x[r][f] < thr) {
          nl += 1;
          pl += y[r];
        }
      }
      const double nr = n - nl, pr = pos - pl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double gain = parent - (nl / n) * gini(pl, nl) - (nr / n) * gini(pr, nr);
      if (gain > best.gain + 1e-15) best = {static_cast<int>(f), thr, gain};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// SVM dual: projected gradient with exact projection onto {0 <= a <= C, y'a = 0}

inline std::vector<double> project_box_hyperplane(const std::vector<double>& v, const std::vector<int>& y, double C) {
  const auto at = [&](double mu) {
    std::vector<double> a(v.size());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      a[i] = std::clamp(v[i] - mu * y[i], 0.0, C);
      s += y[i] * a[i];
    }
    return std::make_pair(a, s);
  };
  // y'a(mu) is non-increasing in mu
  double lo = -1.0, hi = 1.0;
  while (at(lo).second < 0) lo *= 2;
  while (at(hi).second > 0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at(mid).second > 0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi)).first;
}

inline double dual_objective(const std::vector<std::vector<double>>& k, const std::vector<int>& y,
                             const std::vector<double>& a) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    lin += a[i];
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * a[j] * y[i] * y[j] * k[i][j];
  }
  return 0.5 * quad - lin;
}

/// Accelerated projected gradient (FISTA) on the soft-margin dual.
inline std::vector<double> qp_solve(const std::vector<std::vector<double>>& k, const std::vector<int>& y, double C,
                                    int iterations = 20000) {
  const std::size_t n = y.size();
  Eigen::MatrixXd q(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q(i, j) = y[i] * y[j] * k[i][j];
  }
  const double lip = std::max(1e-12, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff());
  std::vector<double> a(n, 0.0), z = a, prev = a;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> step(n);
    for (std::size_t i = 0; i < n; ++i) {
      double g = -1.0;
      for (std::size_t j = 0; j < n; ++j) g += q(i, j) * z[j];
      step[i] = z[i] - g / lip;
    }
    prev = a;
    a = project_box_hyperplane(step, y, C);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + ((t - 1.0) / t_next) * (a[i] - prev[i]);
    t = t_next;
  }
  return a;
}

}  // namespace oracle
