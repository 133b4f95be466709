#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fd4qc/model.hpp"

#include "support/oracles.hpp"

using namespace fd4qc;
using namespace fd4qc::quantum;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> uniform_vec(std::size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

Matrix random_angles(std::size_t n, std::size_t q, std::mt19937_64& rng) {
  Matrix m(n, q);
  std::uniform_real_distribution<double> d(0.0, kPi);
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& v : m.row(r)) v = d(rng);
  }
  return m;
}

}  // namespace

TEST(Gates, TextbookActions) {
  StateVector s(1);
  apply_gate(s, Gate::h(0));
  EXPECT_NEAR(s[0].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s[1].real(), 1.0 / std::sqrt(2.0), 1e-15);

  StateVector b(2);
  apply_gate(b, Gate::ry(0, AngleSource::fixed(kPi)), kPi);  // basis index 1
  apply_gate(b, Gate::cnot(0, 1));
  EXPECT_NEAR(std::abs(b[3]), 1.0, 1e-12);

  StateVector r(1);
  apply_gate(r, Gate::ry(0, AngleSource::fixed(kPi)), kPi);
  EXPECT_NEAR(std::abs(r[0]), 0.0, 1e-12);
  EXPECT_NEAR(r[1].real(), 1.0, 1e-12);
}

TEST(Gates, ValidationErrors) {
  Circuit c;
  c.n_qubits = 2;
  EXPECT_THROW(c.add(Gate::cnot(0, 0)), Error);
  EXPECT_THROW(c.add(Gate::h(2)), Error);
  EXPECT_THROW(c.add(Gate{GateKind::H, 0, -1, AngleSource::fixed(1.0)}), Error);
  EXPECT_THROW(c.add(Gate{GateKind::RX, 0, -1, std::nullopt}), Error);
  EXPECT_THROW(StateVector(0), Error);
}

TEST(Circuits, EmptyAndInverse) {
  Circuit empty;
  empty.n_qubits = 3;
  const auto s = run_circuit(empty, {}, {});
  EXPECT_EQ(s[0], Amplitude(1.0, 0.0));

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    auto c = oracle::random_circuit(4, 40, rng, 3, 2);
    const auto params = uniform_vec(3, rng, -3, 3), feats = uniform_vec(2, rng, 0, kPi);
    c.append(inverse(c));
    const auto back = run_circuit(c, params, feats);
    EXPECT_NEAR(std::abs(back[0]), 1.0, 1e-10);
  }
}

TEST(Circuits, NormPreservedUnderRandomGates) {
  std::mt19937_64 rng(2);
  for (int q = 1; q <= 4; ++q) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto c = oracle::random_circuit(q, 100, rng, 4, 0);
      const auto s = run_circuit(c, uniform_vec(4, rng, -kPi, kPi), {});
      EXPECT_NEAR(s.norm(), 1.0, 1e-12);
    }
  }
}

TEST(Circuits, MatchesKroneckerOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = oracle::random_circuit(3, 30, rng, 4, 3);
    const auto params = uniform_vec(4, rng, -3, 3), feats = uniform_vec(3, rng, 0, kPi);
    const auto s = run_circuit(c, params, feats);
    const auto ref = oracle::oracle_state(c, params, feats);
    for (std::size_t b = 0; b < s.size(); ++b) {
      EXPECT_NEAR(std::abs(s[b] - ref(static_cast<Eigen::Index>(b))), 0.0, 1e-10);
    }
    for (int q = 0; q < 3; ++q) EXPECT_NEAR(expval_z(s, q), oracle::oracle_expval_z(ref, q), 1e-10);
  }
}

TEST(Circuits, JsonRoundTrip) {
  std::mt19937_64 rng(4);
  const auto c = oracle::random_circuit(3, 25, rng, 2, 2);
  EXPECT_EQ(circuit_from_json(to_json(c)), c);
}

TEST(FeatureMap, HandStates) {
  const auto q1 = feature_map(1);
  EXPECT_NEAR(run_circuit(q1, {}, std::vector<double>{0.0}).probability(0), 1.0, 1e-12);
  EXPECT_NEAR(run_circuit(q1, {}, std::vector<double>{kPi}).probability(1), 1.0, 1e-12);
  const auto q2 = feature_map(2);
  EXPECT_EQ(q2.gates.size(), 3u);  // two RY and one CNOT
  const auto s = run_circuit(q2, {}, std::vector<double>{kPi, 0.0});
  EXPECT_NEAR(s.probability(3), 1.0, 1e-12);
  EXPECT_NEAR(s.probability(1), 0.0, 1e-12);
  EXPECT_EQ(feature_map(4).gates.size(), 8u);
}

TEST(Expval, ClosedForms) {
  EXPECT_EQ(expval_z(StateVector(1), 0), 1.0);
  for (double theta : {0.0, 0.4, kPi / 2, 2.0, kPi}) {
    StateVector s(1);
    apply_gate(s, Gate::ry(0, AngleSource::fixed(theta)), theta);
    EXPECT_NEAR(expval_z(s, 0), std::cos(theta), 1e-12);
  }
  StateVector u(3);
  for (int q = 0; q < 3; ++q) apply_gate(u, Gate::h(q));
  for (double e : expval_z_all(u)) EXPECT_NEAR(e, 0.0, 1e-12);
}

TEST(Kernel, SelfFidelityAndClosedForm) {
  std::mt19937_64 rng(5);
  FeatureMapConfig cfg;
  const auto x = uniform_vec(4, rng, 0, kPi);
  EXPECT_NEAR(kernel_value(x, x, cfg), 1.0, 1e-12);

  FeatureMapConfig one;
  one.qubits = 1;
  EXPECT_NEAR(kernel_value(std::vector<double>{0.0}, std::vector<double>{kPi}, one), 0.0, 1e-12);
  EXPECT_NEAR(kernel_value(std::vector<double>{0.0}, std::vector<double>{kPi / 2}, one), 0.5, 1e-10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double a = kPi * i / 9.0, b = kPi * j / 9.0;
      const double c = std::cos((a - b) / 2.0);
      EXPECT_NEAR(kernel_value(std::vector<double>{a}, std::vector<double>{b}, one), c * c, 1e-10);
    }
  }
}

TEST(Kernel, GramMatrixProperties) {
  std::mt19937_64 rng(6);
  FeatureMapConfig cfg;
  const auto x = random_angles(20, 4, rng);
  const auto k = kernel_matrix(x, cfg);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_NEAR(k(i, i), 1.0, 1e-10);
    rows.emplace_back(k.row(i).begin(), k.row(i).end());
    for (std::size_t j = 0; j < 20; ++j) {
      EXPECT_NEAR(k(i, j), k(j, i), 1e-10);
      EXPECT_GE(k(i, j), -1e-12);
      EXPECT_LE(k(i, j), 1.0 + 1e-12);
    }
  }
  EXPECT_GE(oracle::min_eigenvalue(rows), -1e-8);

  Matrix single(1, 4);
  EXPECT_NEAR(kernel_matrix(single, cfg)(0, 0), 1.0, 1e-12);

  auto dup = random_angles(5, 4, rng);
  std::copy(dup.row(1).begin(), dup.row(1).end(), dup.row(3).begin());
  const auto kd = kernel_matrix(dup, cfg);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(kd(1, j), kd(3, j), 1e-12);
}

TEST(Kernel, ShotEstimateIsCloseAndSeeded) {
  std::mt19937_64 rng(7);
  FeatureMapConfig cfg;
  cfg.qubits = 2;
  cfg.shots = 20000;
  const auto x = uniform_vec(2, rng, 0, kPi), z = uniform_vec(2, rng, 0, kPi);
  FeatureMapConfig exact = cfg;
  exact.shots = 0;
  EXPECT_NEAR(kernel_value(x, z, cfg), kernel_value(x, z, exact), 0.02);
  EXPECT_EQ(kernel_value(x, z, cfg), kernel_value(x, z, cfg));
}

TEST(Ansatz, ParameterCountsAndZeroAngles) {
  EXPECT_EQ(ansatz(4, 1).n_params, 8);
  EXPECT_EQ(ansatz(4, 2).n_params, 16);
  EXPECT_THROW(ansatz(4, 0), Error);

  std::mt19937_64 rng(8);
  Circuit prep = feature_map(4);
  Circuit ring;
  ring.n_qubits = 4;
  add_cnot_ring(ring);
  Circuit with_ansatz = prep;
  with_ansatz.append(ansatz(4, 1));
  Circuit with_ring = prep;
  with_ring.append(ring);
  const auto feats = uniform_vec(4, rng, 0, kPi);
  const auto a = run_circuit(with_ansatz, std::vector<double>(8, 0.0), feats);
  const auto b = run_circuit(with_ring, {}, feats);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-12);
}

TEST(ParameterShift, SingleQubitClosedForm) {
  Circuit c;
  c.add(Gate::ry(0, AngleSource::param(0)));
  EXPECT_NEAR(param_shift_grad(c, std::vector<double>{kPi / 3}, {}, 0)[0], -std::sin(kPi / 3), 1e-12);
  EXPECT_NEAR(param_shift_grad(c, std::vector<double>{0.0}, {}, 0)[0], 0.0, 1e-12);
}

TEST(ParameterShift, MatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int q = 1 + trial % 4, layers = 1 + trial % 2;
    const auto c = trial % 3 == 2 ? oracle::random_circuit(q, 30, rng, 5, q) : vqc_circuit(q, layers);
    const auto params = uniform_vec(static_cast<std::size_t>(c.n_params), rng, -kPi, kPi);
    const auto feats = uniform_vec(static_cast<std::size_t>(c.n_features), rng, 0, kPi);
    const auto jp = shift_jacobian(c, params, feats, Wrt::Params);
    const auto jf = shift_jacobian(c, params, feats, Wrt::Features);
    for (int k = 0; k < q; ++k) {
      const auto fp = oracle::finite_diff(
          [&](const std::vector<double>& p) { return expval_z(run_circuit(c, p, feats), k); }, params, 1e-4);
      for (std::size_t j = 0; j < fp.size(); ++j) EXPECT_NEAR(jp(j, k), fp[j], 1e-5) << "trial " << trial;
      const auto ff = oracle::finite_diff(
          [&](const std::vector<double>& f) { return expval_z(run_circuit(c, params, f), k); }, feats, 1e-4);
      for (std::size_t j = 0; j < ff.size(); ++j) EXPECT_NEAR(jf(j, k), ff[j], 1e-5) << "trial " << trial;
    }
  }
}

TEST(Preprocessor, AnglesInRangeAndDeterministic) {
  std::mt19937_64 rng(10);
  Matrix x(50, 6);
  std::normal_distribution<double> g(0.0, 3.0);
  for (std::size_t r = 0; r < 50; ++r) {
    for (auto& v : x.row(r)) v = g(rng);
  }
  const auto p = QuantumPreprocessor::fit(x, 4);
  EXPECT_EQ(p, QuantumPreprocessor::fit(x, 4));
  const auto z = p.transform(x);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (double v : z.row(r)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, kPi);
    }
  }
  // far outside the training range clips to the boundary
  std::vector<double> wild(6, 1e9);
  for (double v : p.transform(wild)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, kPi);
  }
  EXPECT_THROW(p.transform(std::vector<double>(5, 0.0)), Error);
}

TEST(Vqc, IdentityCircuitGivesZeroProbability) {
  VqcModel m;
  m.circuit = vqc_circuit(2, 1);
  m.params.assign(4, 0.0);
  EXPECT_EQ(m.probability_from_angles(std::vector<double>{0.0, 0.0}), 0.0);
}

TEST(Vqc, SinglePointLossDecreasesMonotonically) {
  const auto c = vqc_circuit(1, 1);
  Matrix angles(1, 1);
  angles(0, 0) = 0.4;
  std::vector<double> params{0.1, -0.2};
  VqcConfig cfg;
  cfg.epochs = 10;
  cfg.batch = 1;
  cfg.learning_rate = 0.05;
  Rng rng(1);
  std::vector<double> hist;
  fit_vqc_params(c, params, angles, {1}, cfg, rng, &hist);
  ASSERT_EQ(hist.size(), 11u);
  for (std::size_t i = 1; i < hist.size(); ++i) EXPECT_LT(hist[i], hist[i - 1]) << "step " << i;
}

TEST(Vqc, LossGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  const auto c = vqc_circuit(3, 2);
  const auto angles = random_angles(6, 3, rng);
  const std::vector<int> y{0, 1, 1, 0, 1, 0};
  const auto params = uniform_vec(12, rng, -1, 1);
  std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  const auto g = vqc_loss_grad(c, params, angles, y, rows);
  const auto fd = oracle::finite_diff([&](const std::vector<double>& p) { return vqc_loss(c, p, angles, y); }, params);
  for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(g[j], fd[j], 1e-6);
}

TEST(Hqnn, ZeroWeightsGiveConstantPath) {
  Rng rng(3);
  HqnnConfig cfg;
  cfg.qubits = 2;
  auto m = hqnn_init(3, cfg, rng);
  m.standardization.mean = {0, 0, 0};
  m.standardization.std = {1, 1, 1};
  for (auto& l : m.encoder) l.weights = Matrix(l.weights.rows(), l.weights.cols());
  m.head_weights.assign(2, 0.0);
  m.head_bias = 0.7;
  const auto t = m.forward(std::vector<double>{5.0, -1.0, 2.0});
  for (double a : t.angles) EXPECT_NEAR(a, kPi / 2, 1e-15);
  EXPECT_NEAR(hqnn_forward(m, std::vector<double>{5.0, -1.0, 2.0}), sigmoid(0.7), 1e-15);
  try {
    m.forward(std::vector<double>{1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WidthMismatch);
  }
}

TEST(Hqnn, EndToEndGradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(12);
  Matrix x(5, 3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t r = 0; r < 5; ++r) {
    for (auto& v : x.row(r)) v = g(gen);
  }
  const std::vector<int> y{0, 1, 0, 1, 1};
  for (int depth : {1, 2}) {
    HqnnConfig cfg;
    cfg.qubits = 2;
    cfg.layers = 1;
    cfg.encoder_depth = depth;
    Rng rng(5 + depth);
    auto m = hqnn_init(3, cfg, rng);
    m.standardization = Standardizer::fit(x);
    std::vector<std::size_t> rows{0, 1, 2, 3, 4};
    std::vector<double> grad;
    hqnn_loss_and_grad(m, x, y, rows, &grad);
    const auto flat = m.flatten();
    ASSERT_EQ(grad.size(), flat.size());
    const auto fd = oracle::finite_diff(
        [&](const std::vector<double>& v) {
          auto copy = m;
          copy.unflatten(v);
          return hqnn_loss_and_grad(copy, x, y, rows, nullptr);
        },
        flat, 1e-4);
    for (std::size_t j = 0; j < grad.size(); ++j) EXPECT_NEAR(grad[j], fd[j], 1e-4) << "depth " << depth << " coord " << j;
  }
}

TEST(Hqnn, FlattenRoundTripAndTrainingProgress) {
  std::mt19937_64 gen(13);
  Matrix x(40, 4);
  std::vector<int> y(40);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t r = 0; r < 40; ++r) {
    y[r] = r % 2;
    for (auto& v : x.row(r)) v = g(gen) + (y[r] ? 1.5 : -1.5);
  }
  HqnnConfig cfg;
  cfg.qubits = 2;
  cfg.epochs = 15;
  cfg.batch = 8;
  cfg.learning_rate = 0.05;
  std::vector<double> hist;
  const auto m = hqnn_fit(x, y, cfg, &hist);
  ASSERT_EQ(hist.size(), 16u);
  EXPECT_LT(hist.back(), hist.front());
  auto copy = m;
  copy.unflatten(m.flatten());
  EXPECT_EQ(copy, m);
  EXPECT_EQ(hqnn_fit(x, y, cfg), m);
}

TEST(Qsvm, SeparatesClustersAndRoundTrips) {
  std::mt19937_64 gen(14);
  Matrix x(60, 5);
  std::vector<int> y(60);
  std::normal_distribution<double> g(0.0, 0.5);
  for (std::size_t r = 0; r < 60; ++r) {
    y[r] = r < 30;
    for (auto& v : x.row(r)) v = g(gen) + (y[r] ? 2.0 : -2.0);
  }
  TrainConfig cfg;
  const auto m = train_model("qsvc-2q", x, y, cfg);
  int correct = 0;
  for (std::size_t r = 0; r < 60; ++r) correct += predict(m, x.row(r)).label == y[r];
  EXPECT_EQ(correct, 60);
  const ModelArtifact a{"qsvc-2q", std::nullopt, m};
  const auto b = artifact_from_json(json::parse(to_json(a).dump()));
  EXPECT_EQ(b.model, m);
  for (std::size_t r = 0; r < 60; ++r) EXPECT_EQ(b.model.predict_proba(x.row(r)), m.predict_proba(x.row(r)));
}

TEST(Qsvm, ConcentricCircles) {
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> ang(0.0, 2 * kPi);
  std::normal_distribution<double> noise(0.0, 0.05);
  Matrix x(80, 2);
  std::vector<int> y(80);
  for (std::size_t r = 0; r < 80; ++r) {
    y[r] = r % 2;
    const double radius = y[r] ? 0.3 : 1.0, t = ang(gen);
    x(r, 0) = radius * std::cos(t) + noise(gen);
    x(r, 1) = radius * std::sin(t) + noise(gen);
  }
  QsvmConfig cfg;
  cfg.qubits = 2;
  cfg.C = 100.0;
  const auto m = qsvm_fit(x, y, cfg);
  int correct = 0;
  for (std::size_t r = 0; r < 80; ++r) correct += (m.predict_proba(x.row(r)) >= 0.5) == (y[r] == 1);
  EXPECT_GE(correct, 72);
}

TEST(QuantumModels, ArtifactsRoundTripExactly) {
  std::mt19937_64 gen(16);
  Matrix x(30, 4);
  std::vector<int> y(30);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t r = 0; r < 30; ++r) {
    y[r] = r % 3 == 0;
    for (auto& v : x.row(r)) v = g(gen);
  }
  TrainConfig cfg;
  cfg.vqc.epochs = 2;
  cfg.hqnn.epochs = 2;
  for (const char* id : {"vqc-2l-2q", "hqnn-1l-2q"}) {
    const ModelArtifact a{id, std::nullopt, train_model(id, x, y, cfg)};
    const auto b = artifact_from_json(json::parse(to_json(a).dump()));
    EXPECT_EQ(b.model, a.model) << id;
    EXPECT_TRUE(b.model.quantum());
    for (std::size_t r = 0; r < 30; ++r) EXPECT_EQ(b.model.predict_proba(x.row(r)), a.model.predict_proba(x.row(r)));
  }
}
