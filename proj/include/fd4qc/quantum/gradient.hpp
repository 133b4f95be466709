#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "fd4qc/matrix.hpp"
#include "fd4qc/quantum/circuit.hpp"

namespace fd4qc::quantum {

/// Which angle bindings a Jacobian is taken with respect to.
enum class Wrt { Params, Features };

/**
 * Parameter-shift Jacobian of every <Z_k> with respect to each bound parameter
 * (or feature). Row j, column k holds d<Z_k>/d(source_j).
 *
 * Each gate occurrence of a source is shifted by +-pi/2 on its own and the
 * per-gate terms are summed (product rule), scaled by the binding coefficient:
 *   d<Z>/d theta = coeff * [f(angle + pi/2) - f(angle - pi/2)] / 2
 * which is exact for RX / RY / RZ.
 */
inline Matrix shift_jacobian(const Circuit& c, std::span<const double> params, std::span<const double> features,
                             Wrt wrt = Wrt::Params) {
  check_widths(c, params, features);
  const auto want = wrt == Wrt::Params ? AngleSource::Kind::Param : AngleSource::Kind::Feature;
  const int count = wrt == Wrt::Params ? c.n_params : c.n_features;
  Matrix jac(static_cast<std::size_t>(count), static_cast<std::size_t>(c.n_qubits));
  constexpr double half_pi = std::numbers::pi / 2.0;
  for (std::size_t gi = 0; gi < c.gates.size(); ++gi) {
    const auto& g = c.gates[gi];
    if (!g.angle || g.angle->kind != want) continue;
    if (!is_rotation(g.kind)) throw Error(Errc::UnsupportedGate, "parameter-shift needs a rotation gate");
    const auto plus = expval_z_all(run_circuit(c, params, features, static_cast<int>(gi), half_pi));
    const auto minus = expval_z_all(run_circuit(c, params, features, static_cast<int>(gi), -half_pi));
    auto row = jac.row(static_cast<std::size_t>(g.angle->index));
    for (int k = 0; k < c.n_qubits; ++k) row[k] += g.angle->coeff * (plus[k] - minus[k]) / 2.0;
  }
  return jac;
}

/// d<Z_qubit>/d params via the parameter-shift rule.
inline std::vector<double> param_shift_grad(const Circuit& c, std::span<const double> params,
                                            std::span<const double> features, int qubit) {
  if (qubit < 0 || qubit >= c.n_qubits) throw Error(Errc::IndexOutOfRange, "observable qubit out of range");
  const Matrix jac = shift_jacobian(c, params, features, Wrt::Params);
  std::vector<double> g(jac.rows());
  for (std::size_t j = 0; j < jac.rows(); ++j) g[j] = jac(j, static_cast<std::size_t>(qubit));
  return g;
}

}  // namespace fd4qc::quantum
