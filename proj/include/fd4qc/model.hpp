#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fd4qc/boosting.hpp"
#include "fd4qc/features.hpp"
#include "fd4qc/linear.hpp"
#include "fd4qc/quantum/hqnn.hpp"
#include "fd4qc/quantum/qsvm.hpp"
#include "fd4qc/quantum/vqc.hpp"
#include "fd4qc/tree.hpp"

namespace fd4qc {

inline constexpr int kArtifactVersion = 1;
inline constexpr const char* kArtifactFormat = "fd4qc-model";

enum class ModelKind { Lr, Dt, Rf, Gbt, Qsvc, Vqc, Hqnn };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Lr: return "lr";
    case ModelKind::Dt: return "dt";
    case ModelKind::Rf: return "rf";
    case ModelKind::Gbt: return "xgb";
    case ModelKind::Qsvc: return "qsvc";
    case ModelKind::Vqc: return "vqc";
    case ModelKind::Hqnn: return "hqnn";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  for (auto k : {ModelKind::Lr, ModelKind::Dt, ModelKind::Rf, ModelKind::Gbt, ModelKind::Qsvc, ModelKind::Vqc,
                 ModelKind::Hqnn}) {
    if (to_string(k) == s) return k;
  }
  if (s == "gbt") return ModelKind::Gbt;
  throw Error(Errc::UnknownModel, "unknown model kind '" + s + "'");
}

inline bool is_quantum(ModelKind k) { return k == ModelKind::Qsvc || k == ModelKind::Vqc || k == ModelKind::Hqnn; }

/// A model id such as "rf", "qsvc-2q" or "hqnn-2l-4q": a kind plus optional layer and qubit overrides.
struct ModelSpec {
  ModelKind kind = ModelKind::Lr;
  std::optional<int> layers;
  std::optional<int> qubits;
};

inline ModelSpec parse_model_spec(const std::string& id) {
  ModelSpec spec;
  std::size_t pos = id.find('-');
  spec.kind = model_kind_from_string(id.substr(0, pos));
  while (pos != std::string::npos) {
    const std::size_t next = id.find('-', pos + 1);
    const std::string part = id.substr(pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1);
    pos = next;
    int v = 0;
    const char* end = part.data() + part.size();
    const auto [p, ec] = std::from_chars(part.data(), end, v);
    if (ec != std::errc() || p + 1 != end || v < 1) throw Error(Errc::UnknownModel, "bad model id '" + id + "'");
    if (*p == 'l' && is_quantum(spec.kind) && spec.kind != ModelKind::Qsvc) {
      spec.layers = v;
    } else if (*p == 'q' && is_quantum(spec.kind)) {
      spec.qubits = v;
    } else {
      throw Error(Errc::UnknownModel, "bad model id '" + id + "'");
    }
  }
  return spec;
}

using ModelVariant = std::variant<LinearModel, Tree, Forest, BoostedEnsemble, quantum::QsvmModel, quantum::VqcModel,
                                  quantum::HqnnModel>;

struct Prediction {
  double probability = 0.0;
  int label = 0;
};

/// Any fitted model plus the input width it was trained on.
struct TrainedModel {
  ModelVariant impl;
  std::size_t input_width = 0;

  ModelKind kind() const { return static_cast<ModelKind>(impl.index()); }
  bool quantum() const { return is_quantum(kind()); }

  double predict_proba(std::span<const double> x) const {
    if (x.size() != input_width) {
      throw Error(Errc::DimensionMismatch, "expected " + std::to_string(input_width) + " features, got " +
                                               std::to_string(x.size()));
    }
    const double p = std::visit(
        [&](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LinearModel>) {
            return lr_predict_proba(m, x);
          } else if constexpr (std::is_same_v<T, Tree> || std::is_same_v<T, Forest> ||
                               std::is_same_v<T, BoostedEnsemble>) {
            return m.predict(x);
          } else {
            return m.predict_proba(x);
          }
        },
        impl);
    return std::clamp(p, 0.0, 1.0);
  }

  bool operator==(const TrainedModel&) const = default;
};

/// Hard label at 0.5, ties positive.
inline Prediction predict(const TrainedModel& m, std::span<const double> x) {
  const double p = m.predict_proba(x);
  return {p, p >= 0.5 ? 1 : 0};
}

struct TrainConfig {
  LrConfig lr;
  TreeConfig dt;
  ForestConfig rf;
  GbtConfig gbt;
  quantum::QsvmConfig qsvc;
  quantum::VqcConfig vqc;
  quantum::HqnnConfig hqnn;

  /// Propagates one seed to every seeded learner.
  void set_seed(std::uint64_t seed) {
    rf.seed = seed;
    qsvc.seed = seed;
    vqc.seed = seed;
    hqnn.seed = seed;
  }
};

inline TrainedModel train_model(const ModelSpec& spec, const Matrix& x, const std::vector<int>& y,
                                const TrainConfig& cfg = {}) {
  check_fit_inputs(x, y);
  TrainedModel out;
  out.input_width = x.cols();
  switch (spec.kind) {
    case ModelKind::Lr: out.impl = lr_fit(x, y, cfg.lr); break;
    case ModelKind::Dt: out.impl = tree_fit(x, y, cfg.dt); break;
    case ModelKind::Rf: out.impl = rf_fit(x, y, cfg.rf); break;
    case ModelKind::Gbt: out.impl = gbt_fit(x, y, cfg.gbt); break;
    case ModelKind::Qsvc: {
      auto c = cfg.qsvc;
      if (spec.qubits) c.qubits = *spec.qubits;
      out.impl = quantum::qsvm_fit(x, y, c);
      break;
    }
    case ModelKind::Vqc: {
      auto c = cfg.vqc;
      if (spec.qubits) c.qubits = *spec.qubits;
      if (spec.layers) c.layers = *spec.layers;
      out.impl = quantum::vqc_fit(x, y, c);
      break;
    }
    case ModelKind::Hqnn: {
      auto c = cfg.hqnn;
      if (spec.qubits) c.qubits = *spec.qubits;
      if (spec.layers) c.layers = *spec.layers;
      out.impl = quantum::hqnn_fit(x, y, c);
      break;
    }
  }
  return out;
}

inline TrainedModel train_model(const std::string& id, const Matrix& x, const std::vector<int>& y,
                                const TrainConfig& cfg = {}) {
  return train_model(parse_model_spec(id), x, y, cfg);
}

// ---------------------------------------------------------------------------
// Artifacts

namespace detail {

inline json to_json(const Matrix& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

inline Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.rows() * m.cols()) throw Error(Errc::BadArtifact, "matrix data size mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r * m.cols()), m.cols(), m.row(r).begin());
  }
  return m;
}

inline json to_json(const Standardizer& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline Standardizer standardizer_from_json(const json& j) {
  Standardizer s{j.at("mean").get<std::vector<double>>(), j.at("std").get<std::vector<double>>()};
  if (s.mean.size() != s.std.size()) throw Error(Errc::BadArtifact, "standardizer size mismatch");
  return s;
}

inline json to_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

inline Tree tree_from_json(const json& j) {
  Tree t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>()});
  }
  const int size = static_cast<int>(t.nodes.size());
  if (size == 0) throw Error(Errc::BadArtifact, "empty tree");
  for (const auto& n : t.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
      throw Error(Errc::BadArtifact, "tree child index out of range");
    }
  }
  return t;
}

inline json to_json(const quantum::QuantumPreprocessor& p) {
  return {{"standardization", to_json(p.standardization)},
          {"projection", to_json(p.projection)},
          {"lo", p.lo},
          {"hi", p.hi}};
}

inline quantum::QuantumPreprocessor preprocessor_from_json(const json& j) {
  quantum::QuantumPreprocessor p;
  p.standardization = standardizer_from_json(j.at("standardization"));
  p.projection = matrix_from_json(j.at("projection"));
  p.lo = j.at("lo").get<std::vector<double>>();
  p.hi = j.at("hi").get<std::vector<double>>();
  return p;
}

inline json model_to_json(const ModelVariant& v) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return {{"standardization", to_json(m.standardization)}, {"weights", m.weights}, {"intercept", m.intercept}};
        } else if constexpr (std::is_same_v<T, Tree>) {
          return {{"nodes", to_json(m)}};
        } else if constexpr (std::is_same_v<T, Forest>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(to_json(t));
          return {{"trees", trees}, {"tree_seeds", m.tree_seeds}, {"features_per_split", m.features_per_split}};
        } else if constexpr (std::is_same_v<T, BoostedEnsemble>) {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(to_json(t));
          return {{"base_score", m.base_score}, {"shrinkage", m.shrinkage}, {"l2_leaf", m.l2_leaf}, {"trees", trees}};
        } else if constexpr (std::is_same_v<T, quantum::QsvmModel>) {
          return {{"preprocessor", to_json(m.preprocessor)},
                  {"feature_map",
                   {{"qubits", m.map.qubits}, {"repetitions", m.map.repetitions}, {"shots", m.map.shots},
                    {"seed", m.map.seed}}},
                  {"support_vectors", to_json(m.support_vectors)},
                  {"dual_coefficients", m.dual_coefficients},
                  {"bias", m.bias},
                  {"C", m.C},
                  {"platt_slope", m.platt_slope}};
        } else if constexpr (std::is_same_v<T, quantum::VqcModel>) {
          return {{"preprocessor", to_json(m.preprocessor)},
                  {"circuit", quantum::to_json(m.circuit)},
                  {"params", m.params},
                  {"shots", m.shots},
                  {"seed", m.seed}};
        } else {
          json enc = json::array();
          for (const auto& l : m.encoder) enc.push_back({{"weights", to_json(l.weights)}, {"bias", l.bias}});
          return {{"standardization", to_json(m.standardization)},
                  {"encoder", enc},
                  {"circuit", quantum::to_json(m.circuit)},
                  {"params", m.params},
                  {"head_weights", m.head_weights},
                  {"head_bias", m.head_bias}};
        }
      },
      v);
}

inline ModelVariant model_from_json(ModelKind kind, const json& j) {
  switch (kind) {
    case ModelKind::Lr:
      return LinearModel{standardizer_from_json(j.at("standardization")), j.at("weights").get<std::vector<double>>(),
                         j.at("intercept").get<double>()};
    case ModelKind::Dt: return tree_from_json(j.at("nodes"));
    case ModelKind::Rf: {
      Forest f;
      for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
      f.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
      f.features_per_split = j.at("features_per_split").get<std::size_t>();
      return f;
    }
    case ModelKind::Gbt: {
      BoostedEnsemble b;
      b.base_score = j.at("base_score").get<double>();
      b.shrinkage = j.at("shrinkage").get<double>();
      b.l2_leaf = j.at("l2_leaf").get<double>();
      for (const auto& t : j.at("trees")) b.trees.push_back(tree_from_json(t));
      return b;
    }
    case ModelKind::Qsvc: {
      quantum::QsvmModel m;
      m.preprocessor = preprocessor_from_json(j.at("preprocessor"));
      const auto& fm = j.at("feature_map");
      m.map = {fm.at("qubits").get<int>(), fm.at("repetitions").get<int>(), fm.at("shots").get<int>(),
               fm.at("seed").get<std::uint64_t>()};
      m.support_vectors = matrix_from_json(j.at("support_vectors"));
      m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
      m.bias = j.at("bias").get<double>();
      m.C = j.at("C").get<double>();
      m.platt_slope = j.at("platt_slope").get<double>();
      if (m.dual_coefficients.size() != m.support_vectors.rows()) {
        throw Error(Errc::BadArtifact, "support vector count mismatch");
      }
      return m;
    }
    case ModelKind::Vqc: {
      quantum::VqcModel m;
      m.preprocessor = preprocessor_from_json(j.at("preprocessor"));
      m.circuit = quantum::circuit_from_json(j.at("circuit"));
      m.params = j.at("params").get<std::vector<double>>();
      m.shots = j.at("shots").get<int>();
      m.seed = j.at("seed").get<std::uint64_t>();
      return m;
    }
    case ModelKind::Hqnn: {
      quantum::HqnnModel m;
      m.standardization = standardizer_from_json(j.at("standardization"));
      for (const auto& l : j.at("encoder")) {
        m.encoder.push_back({matrix_from_json(l.at("weights")), l.at("bias").get<std::vector<double>>()});
      }
      m.circuit = quantum::circuit_from_json(j.at("circuit"));
      m.params = j.at("params").get<std::vector<double>>();
      m.head_weights = j.at("head_weights").get<std::vector<double>>();
      m.head_bias = j.at("head_bias").get<double>();
      return m;
    }
  }
  throw Error(Errc::BadArtifact, "unhandled model kind");
}

}  // namespace detail

/// A trained model as written to disk: id, kind, the feature schema it consumes, parameters.
struct ModelArtifact {
  std::string id;
  std::optional<FeatureSchema> schema;
  TrainedModel model;

  int schema_version() const { return schema ? schema->version : kFeatureSchemaVersion; }
};

inline json to_json(const ModelArtifact& a) {
  return {{"format", kArtifactFormat},
          {"artifact_version", kArtifactVersion},
          {"id", a.id},
          {"kind", to_string(a.model.kind())},
          {"engine", a.model.quantum() ? "quantum" : "classical"},
          {"schema_version", a.schema_version()},
          {"schema", a.schema ? to_json(*a.schema) : json(nullptr)},
          {"input_width", a.model.input_width},
          {"model", detail::model_to_json(a.model.impl)}};
}

inline ModelArtifact artifact_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kArtifactFormat) throw Error(Errc::BadArtifact, "not a model artifact");
    if (j.at("artifact_version").get<int>() != kArtifactVersion) {
      throw Error(Errc::BadArtifact, "unsupported artifact version");
    }
    ModelArtifact a;
    a.id = j.at("id").get<std::string>();
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    if (!j.at("schema").is_null()) a.schema = feature_schema_from_json(j.at("schema"));
    if (a.schema_version() != j.at("schema_version").get<int>()) {
      throw Error(Errc::SchemaMismatch, "artifact schema version disagrees with embedded schema");
    }
    a.model.input_width = j.at("input_width").get<std::size_t>();
    a.model.impl = detail::model_from_json(kind, j.at("model"));
    if (a.schema && a.schema->width() != a.model.input_width) {
      throw Error(Errc::SchemaMismatch, "model input width disagrees with schema width");
    }
    return a;
  } catch (const json::exception& e) {
    throw Error(Errc::BadArtifact, e.what());
  }
}

inline void save_artifact(const std::string& path, const ModelArtifact& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  out << to_json(a).dump() << '\n';
  if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
}

inline ModelArtifact load_artifact(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::BadArtifact, "'" + path + "': " + e.what());
  }
  return artifact_from_json(j);
}

}  // namespace fd4qc
