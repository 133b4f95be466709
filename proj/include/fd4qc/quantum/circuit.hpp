#pragma once

#include <algorithm>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fd4qc/quantum/statevector.hpp"

namespace fd4qc::quantum {

/// Ordered gate list over a fixed register. Parameter and feature indices must be dense 0..k-1.
struct Circuit {
  int n_qubits = 1;
  std::vector<Gate> gates;
  int n_params = 0;
  int n_features = 0;

  /// Appends and keeps n_params / n_features as max index + 1.
  Circuit& add(const Gate& g) {
    validate_gate(g);
    gates.push_back(g);
    if (g.angle && g.angle->kind == AngleSource::Kind::Param) n_params = std::max(n_params, g.angle->index + 1);
    if (g.angle && g.angle->kind == AngleSource::Kind::Feature) n_features = std::max(n_features, g.angle->index + 1);
    return *this;
  }

  Circuit& append(const Circuit& other) {
    if (other.n_qubits != n_qubits) throw Error(Errc::WidthMismatch, "cannot append circuits of different widths");
    for (const auto& g : other.gates) add(g);
    return *this;
  }

  void validate_gate(const Gate& g) const {
    if (g.target < 0 || g.target >= n_qubits) throw Error(Errc::IndexOutOfRange, "target qubit out of range");
    if (g.kind == GateKind::CNOT) {
      if (g.control < 0 || g.control >= n_qubits || g.control == g.target) {
        throw Error(Errc::IndexOutOfRange, "CNOT control must be a distinct valid qubit");
      }
      if (g.angle) throw Error(Errc::UnsupportedGate, "CNOT takes no angle");
    } else if (g.kind == GateKind::H) {
      if (g.angle) throw Error(Errc::UnsupportedGate, "H takes no angle");
    } else if (!g.angle) {
      throw Error(Errc::UnsupportedGate, "rotation gate needs exactly one angle source");
    }
  }

  /// True when every index in [0, n_params) and [0, n_features) is bound by some gate.
  bool dense_bindings() const {
    std::vector<char> p(n_params, 0), f(n_features, 0);
    for (const auto& g : gates) {
      if (!g.angle) continue;
      if (g.angle->kind == AngleSource::Kind::Param) p[g.angle->index] = 1;
      if (g.angle->kind == AngleSource::Kind::Feature) f[g.angle->index] = 1;
    }
    return std::all_of(p.begin(), p.end(), [](char c) { return c; }) &&
           std::all_of(f.begin(), f.end(), [](char c) { return c; });
  }

  bool operator==(const Circuit&) const = default;
};

/// Adjoint circuit: reversed order, rotation angles negated.
inline Circuit inverse(const Circuit& c) {
  Circuit inv;
  inv.n_qubits = c.n_qubits;
  for (auto it = c.gates.rbegin(); it != c.gates.rend(); ++it) {
    Gate g = *it;
    if (g.angle) {
      if (g.angle->kind == AngleSource::Kind::Fixed) {
        g.angle->value = -g.angle->value;
      } else {
        g.angle->coeff = -g.angle->coeff;
      }
    }
    inv.add(g);
  }
  return inv;
}

inline void check_widths(const Circuit& c, std::span<const double> params, std::span<const double> features) {
  if (static_cast<int>(params.size()) != c.n_params) {
    throw Error(Errc::WidthMismatch, "circuit expects " + std::to_string(c.n_params) + " parameters, got " +
                                         std::to_string(params.size()));
  }
  if (static_cast<int>(features.size()) != c.n_features) {
    throw Error(Errc::WidthMismatch, "circuit expects " + std::to_string(c.n_features) + " features, got " +
                                         std::to_string(features.size()));
  }
}

/// Simulates from |0...0>. `shift` is added to the angle of gate `shifted_gate` (used by the
/// parameter-shift rule); pass shifted_gate = -1 for a plain run.
inline StateVector run_circuit(const Circuit& c, std::span<const double> params, std::span<const double> features,
                               int shifted_gate = -1, double shift = 0.0) {
  check_widths(c, params, features);
  StateVector state(c.n_qubits);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const auto& g = c.gates[i];
    double angle = g.angle ? g.angle->resolve(params, features) : 0.0;
    if (static_cast<int>(i) == shifted_gate) angle += shift;
    apply_gate(state, g, angle);
  }
  return state;
}

/// CNOT ring i -> (i+1) mod q. Two qubits share a single edge (one CNOT 0 -> 1);
/// a single qubit gets no entangler.
inline void add_cnot_ring(Circuit& c) {
  const int q = c.n_qubits;
  if (q < 2) return;
  for (int i = 0; i + 1 < q; ++i) c.add(Gate::cnot(i, i + 1));
  if (q > 2) c.add(Gate::cnot(q - 1, 0));
}

/// Angle encoding: per repetition RY(x_i) on qubit i, then a CNOT ring.
/// Feature i of the circuit is bound to feature index `feature_offset + i`.
inline Circuit feature_map(int q, int repetitions = 1, int feature_offset = 0) {
  Circuit c;
  c.n_qubits = q;
  for (int r = 0; r < repetitions; ++r) {
    for (int i = 0; i < q; ++i) c.add(Gate::ry(i, AngleSource::feature(feature_offset + i)));
    add_cnot_ring(c);
  }
  return c;
}

/// Hardware-efficient layers: RY(theta) then RZ(theta') on each qubit, then a CNOT ring.
/// 2 q L trainable parameters starting at `param_offset`.
inline Circuit ansatz(int q, int layers, int param_offset = 0) {
  if (layers < 1) throw Error(Errc::BadConfig, "ansatz needs at least one layer");
  Circuit c;
  c.n_qubits = q;
  int p = param_offset;
  for (int l = 0; l < layers; ++l) {
    for (int i = 0; i < q; ++i) {
      c.add(Gate::ry(i, AngleSource::param(p++)));
      c.add(Gate::rz(i, AngleSource::param(p++)));
    }
    add_cnot_ring(c);
  }
  return c;
}

// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Circuit& c) {
  using nlohmann::json;
  json gates = json::array();
  for (const auto& g : c.gates) {
    json jg = {{"kind", to_string(g.kind)}, {"target", g.target}};
    if (g.control >= 0) jg["control"] = g.control;
    if (g.angle) {
      const auto& a = *g.angle;
      switch (a.kind) {
        case AngleSource::Kind::Fixed: jg["angle"] = {{"fixed", a.value}}; break;
        case AngleSource::Kind::Param: jg["angle"] = {{"param", a.index}, {"coeff", a.coeff}}; break;
        case AngleSource::Kind::Feature: jg["angle"] = {{"feature", a.index}, {"coeff", a.coeff}}; break;
      }
    }
    gates.push_back(jg);
  }
  return {{"n_qubits", c.n_qubits}, {"n_params", c.n_params}, {"n_features", c.n_features}, {"gates", gates}};
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  Circuit c;
  c.n_qubits = j.at("n_qubits").get<int>();
  if (c.n_qubits < 1 || c.n_qubits > kMaxQubits) throw Error(Errc::BadArtifact, "bad qubit count");
  for (const auto& jg : j.at("gates")) {
    Gate g;
    g.kind = gate_kind_from_string(jg.at("kind").get<std::string>());
    g.target = jg.at("target").get<int>();
    g.control = jg.value("control", -1);
    if (jg.contains("angle")) {
      const auto& ja = jg.at("angle");
      if (ja.contains("fixed")) {
        g.angle = AngleSource::fixed(ja.at("fixed").get<double>());
      } else if (ja.contains("param")) {
        g.angle = AngleSource::param(ja.at("param").get<int>(), ja.at("coeff").get<double>());
      } else {
        g.angle = AngleSource::feature(ja.at("feature").get<int>(), ja.at("coeff").get<double>());
      }
    }
    c.add(g);
  }
  if (c.n_params != j.at("n_params").get<int>() || c.n_features != j.at("n_features").get<int>()) {
    throw Error(Errc::BadArtifact, "circuit binding counts disagree with gate list");
  }
  return c;
}

}  // namespace fd4qc::quantum
