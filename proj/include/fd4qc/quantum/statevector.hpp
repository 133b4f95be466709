#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fd4qc/error.hpp"
#include "fd4qc/rng.hpp"

namespace fd4qc::quantum {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 12;

/// Dense pure state over n qubits. Little-endian: qubit q is bit q of the basis index.
class StateVector {
 public:
  explicit StateVector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
      throw Error(Errc::IndexOutOfRange, "qubit count must lie in [1, " + std::to_string(kMaxQubits) + "]");
    }
    amps_.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
    amps_[0] = 1.0;
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return amps_.size(); }

  Amplitude& operator[](std::size_t i) { return amps_[i]; }
  const Amplitude& operator[](std::size_t i) const { return amps_[i]; }

  std::span<Amplitude> amplitudes() { return amps_; }
  std::span<const Amplitude> amplitudes() const { return amps_; }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

  double probability(std::size_t basis) const { return std::norm(amps_[basis]); }

 private:
  int n_qubits_;
  std::vector<Amplitude> amps_;
};

enum class GateKind { RX, RY, RZ, H, CNOT };

inline bool is_rotation(GateKind k) { return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ; }

inline std::string to_string(GateKind k) {
  switch (k) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::CNOT: return "CNOT";
  }
  return "?";
}

inline GateKind gate_kind_from_string(const std::string& s) {
  if (s == "RX") return GateKind::RX;
  if (s == "RY") return GateKind::RY;
  if (s == "RZ") return GateKind::RZ;
  if (s == "H") return GateKind::H;
  if (s == "CNOT") return GateKind::CNOT;
  throw Error(Errc::UnsupportedGate, "unknown gate '" + s + "'");
}

/// Where a rotation angle comes from: a literal, a trainable parameter, or an input feature.
/// Bound angles are `coeff * source[index]`.
struct AngleSource {
  enum class Kind { Fixed, Param, Feature };
  Kind kind = Kind::Fixed;
  double value = 0.0;  // Fixed only
  int index = 0;       // Param / Feature
  double coeff = 1.0;

  static AngleSource fixed(double v) { return {Kind::Fixed, v, 0, 1.0}; }
  static AngleSource param(int i, double coeff = 1.0) { return {Kind::Param, 0.0, i, coeff}; }
  static AngleSource feature(int i, double coeff = 1.0) { return {Kind::Feature, 0.0, i, coeff}; }

  double resolve(std::span<const double> params, std::span<const double> features) const {
    switch (kind) {
      case Kind::Fixed: return value;
      case Kind::Param: return coeff * params[index];
      case Kind::Feature: return coeff * features[index];
    }
    return 0.0;
  }

  bool operator==(const AngleSource&) const = default;
};

struct Gate {
  GateKind kind = GateKind::H;
  int target = 0;
  int control = -1;
  std::optional<AngleSource> angle;

  static Gate rx(int q, AngleSource a) { return {GateKind::RX, q, -1, a}; }
  static Gate ry(int q, AngleSource a) { return {GateKind::RY, q, -1, a}; }
  static Gate rz(int q, AngleSource a) { return {GateKind::RZ, q, -1, a}; }
  static Gate h(int q) { return {GateKind::H, q, -1, std::nullopt}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control, std::nullopt}; }

  bool operator==(const Gate&) const = default;
};

/// Applies `gate` with the already-resolved `angle` (ignored for H / CNOT).
inline void apply_gate(StateVector& state, const Gate& gate, double angle = 0.0) {
  const int n = state.n_qubits();
  if (gate.target < 0 || gate.target >= n) throw Error(Errc::IndexOutOfRange, "target qubit out of range");
  if (!std::isfinite(angle)) throw Error(Errc::NonFinite, "gate angle is not finite");
  auto amps = state.amplitudes();
  const std::size_t stride = std::size_t{1} << gate.target;
  const std::size_t dim = amps.size();

  if (gate.kind == GateKind::CNOT) {
    if (gate.control < 0 || gate.control >= n || gate.control == gate.target) {
      throw Error(Errc::IndexOutOfRange, "CNOT control must be a distinct valid qubit");
    }
    const std::size_t cmask = std::size_t{1} << gate.control;
    for (std::size_t i = 0; i < dim; ++i) {
      if ((i & stride) == 0 && (i & cmask) != 0) std::swap(amps[i], amps[i | stride]);
    }
    return;
  }

  // 2x2 unitary [[m00, m01], [m10, m11]] on every (|..0..>, |..1..>) pair.
  Amplitude m00, m01, m10, m11;
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  switch (gate.kind) {
    case GateKind::RX:
      m00 = c; m01 = Amplitude(0.0, -s); m10 = Amplitude(0.0, -s); m11 = c;
      break;
    case GateKind::RY:
      m00 = c; m01 = -s; m10 = s; m11 = c;
      break;
    case GateKind::RZ:
      m00 = Amplitude(c, -s); m01 = 0.0; m10 = 0.0; m11 = Amplitude(c, s);
      break;
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      m00 = r; m01 = r; m10 = r; m11 = -r;
      break;
    }
    default:
      throw Error(Errc::UnsupportedGate, "unhandled gate");
  }
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t off = 0; off < stride; ++off) {
      const std::size_t i0 = base + off, i1 = i0 + stride;
      const Amplitude a0 = amps[i0], a1 = amps[i1];
      amps[i0] = m00 * a0 + m01 * a1;
      amps[i1] = m10 * a0 + m11 * a1;
    }
  }
}

/// <Z_q> = sum_b |amp_b|^2 * (+1 if bit q of b is 0 else -1)
inline double expval_z(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.n_qubits()) throw Error(Errc::IndexOutOfRange, "qubit out of range");
  const std::size_t mask = std::size_t{1} << qubit;
  double e = 0.0;
  for (std::size_t b = 0; b < state.size(); ++b) {
    const double p = state.probability(b);
    e += (b & mask) ? -p : p;
  }
  return e;
}

inline std::vector<double> expval_z_all(const StateVector& state) {
  std::vector<double> e(state.n_qubits(), 0.0);
  for (std::size_t b = 0; b < state.size(); ++b) {
    const double p = state.probability(b);
    for (int q = 0; q < state.n_qubits(); ++q) e[q] += ((b >> q) & 1U) ? -p : p;
  }
  return e;
}

/// Draws `shots` computational-basis samples.
inline std::vector<std::size_t> sample_basis(const StateVector& state, int shots, Rng& rng) {
  std::vector<double> cdf(state.size());
  double acc = 0.0;
  for (std::size_t b = 0; b < state.size(); ++b) {
    acc += state.probability(b);
    cdf[b] = acc;
  }
  std::vector<std::size_t> out;
  out.reserve(shots);
  for (int s = 0; s < shots; ++s) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    out.push_back(it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin()));
  }
  return out;
}

/// Shot-sampled estimate of every <Z_q>.
inline std::vector<double> sampled_expval_z_all(const StateVector& state, int shots, Rng& rng) {
  std::vector<double> e(state.n_qubits(), 0.0);
  for (auto b : sample_basis(state, shots, rng)) {
    for (int q = 0; q < state.n_qubits(); ++q) e[q] += ((b >> q) & 1U) ? -1.0 : 1.0;
  }
  for (auto& v : e) v /= shots;
  return e;
}

}  // namespace fd4qc::quantum
