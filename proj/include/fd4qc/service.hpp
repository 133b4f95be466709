#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fd4qc/model.hpp"

namespace fd4qc::service {

using nlohmann::json;

struct RoutingConfig {
  std::string default_model = "rf";
  /// weights for "auto" requests; empty routes every "auto" request to default_model
  std::map<std::string, double> ab_weights;
  /// quantum model id -> classical surrogate id
  std::map<std::string, std::string> fallback_map;
  bool quantum_enabled = true;
  std::chrono::milliseconds quantum_timeout{2000};
  /// used for quantum models without a fallback_map entry
  std::string default_surrogate = "rf";
};

struct ServerConfig {
  RoutingConfig routing;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string models_dir = "models";
  /// seeds the per-request uniform draw for "auto" routing
  std::uint64_t seed = 42;
};

struct PredictRequest {
  std::string request_id;
  std::string requested_model = "auto";
  std::optional<std::vector<double>> feature_vector;
  std::optional<int> schema_version;
  std::optional<Transaction> transaction;
  AccountState from_account_state;
  AccountState to_account_state;
  PairState pair_state;
};

struct PredictResponse {
  int prediction = 0;
  double probability = 0.0;
  std::string engine;
  std::string model_id;
  bool fallback_used = false;
  std::string request_id;
  double latency = 0.0;  // milliseconds
};

// ---------------------------------------------------------------------------
// Wire format

inline json to_json(const PredictResponse& r) {
  return {{"prediction", r.prediction}, {"probability", r.probability}, {"engine", r.engine},
          {"model_id", r.model_id},     {"fallback_used", r.fallback_used}, {"request_id", r.request_id},
          {"latency", r.latency}};
}

inline PredictRequest request_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::BadRequest, "request body must be an object");
  PredictRequest r;
  try {
    if (j.contains("request_id")) r.request_id = j.at("request_id").get<std::string>();
    if (j.contains("requested_model")) r.requested_model = j.at("requested_model").get<std::string>();
    const bool has_vector = j.contains("feature_vector");
    const bool has_tx = j.contains("transaction");
    if (has_vector == has_tx) {
      throw Error(Errc::BadRequest, "exactly one of feature_vector or transaction is required");
    }
    if (has_vector) {
      r.feature_vector = j.at("feature_vector").get<std::vector<double>>();
      if (!j.contains("schema_version")) throw Error(Errc::BadRequest, "feature_vector needs schema_version");
      r.schema_version = j.at("schema_version").get<int>();
    } else {
      r.transaction = transaction_from_json(j.at("transaction"));
      if (j.contains("schema_version")) r.schema_version = j.at("schema_version").get<int>();
      if (j.contains("from_account_state")) r.from_account_state = account_state_from_json(j.at("from_account_state"));
      if (j.contains("to_account_state")) r.to_account_state = account_state_from_json(j.at("to_account_state"));
      if (j.contains("pair_state")) r.pair_state = pair_state_from_json(j.at("pair_state"));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::BadRequest, e.what());
  }
  return r;
}

inline RoutingConfig routing_from_json(const json& j) {
  RoutingConfig c;
  try {
    c.default_model = j.value("default_model", c.default_model);
    if (j.contains("ab_weights")) c.ab_weights = j.at("ab_weights").get<std::map<std::string, double>>();
    if (j.contains("fallback_map")) c.fallback_map = j.at("fallback_map").get<std::map<std::string, std::string>>();
    c.quantum_enabled = j.value("quantum_enabled", c.quantum_enabled);
    c.quantum_timeout = std::chrono::milliseconds(j.value("quantum_timeout", c.quantum_timeout.count()));
    c.default_surrogate = j.value("default_surrogate", c.default_surrogate);
  } catch (const json::exception& e) {
    throw Error(Errc::BadConfig, e.what());
  }
  return c;
}

inline bool parse_flag(const std::string& v) {
  if (v == "1" || v == "true" || v == "TRUE" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "FALSE" || v == "no" || v == "off") return false;
  throw Error(Errc::BadConfig, "cannot read '" + v + "' as a flag");
}

/// Config file: a JSON object holding the RoutingConfig fields plus optional host, port,
/// models_dir and seed.
inline ServerConfig server_config_from_json(const json& j) {
  ServerConfig c;
  c.routing = routing_from_json(j);
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.models_dir = j.value("models_dir", c.models_dir);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw Error(Errc::BadConfig, e.what());
  }
  return c;
}

inline ServerConfig load_server_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::BadConfig, "'" + path + "': " + e.what());
  }
  return server_config_from_json(j);
}

/// FD4QC_PORT, FD4QC_MODELS_DIR and FD4QC_QUANTUM_ENABLED override the file.
inline void apply_env_overrides(ServerConfig& c,
                                const std::function<const char*(const char*)>& getenv_fn = &std::getenv) {
  if (const char* v = getenv_fn("FD4QC_PORT")) {
    try {
      c.port = std::stoi(v);
    } catch (const std::exception&) {
      throw Error(Errc::BadConfig, std::string("FD4QC_PORT='") + v + "'");
    }
  }
  if (const char* v = getenv_fn("FD4QC_MODELS_DIR")) c.models_dir = v;
  if (const char* v = getenv_fn("FD4QC_QUANTUM_ENABLED")) c.routing.quantum_enabled = parse_flag(v);
}

// ---------------------------------------------------------------------------

/// Loaded artifacts by id. Immutable once handed to a Service.
class ModelRegistry {
 public:
  void add(ModelArtifact a) {
    if (a.id.empty()) throw Error(Errc::BadArtifact, "artifact without id");
    auto id = a.id;
    if (!models_.emplace(id, std::make_shared<const ModelArtifact>(std::move(a))).second) {
      throw Error(Errc::BadConfig, "duplicate model id '" + id + "'");
    }
  }

  std::shared_ptr<const ModelArtifact> find(const std::string& id) const {
    const auto it = models_.find(id);
    return it == models_.end() ? nullptr : it->second;
  }

  const std::map<std::string, std::shared_ptr<const ModelArtifact>>& all() const { return models_; }

  /// Every *.json file in `dir`, in name order.
  static ModelRegistry load_directory(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(Errc::Io, "models directory '" + dir + "' not found");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    ModelRegistry r;
    for (const auto& f : files) r.add(load_artifact(f.string()));
    return r;
  }

 private:
  std::map<std::string, std::shared_ptr<const ModelArtifact>> models_;
};

/**
 * Stateless scorer. Everything it reads (models, routing) is fixed at construction,
 * except the quantum-path switch, which stands in for a backend outage.
 */
class Service {
 public:
  struct Hooks {
    /// runs on the quantum worker before scoring (fault injection)
    std::function<void(const std::string& model_id)> before_quantum;
    /// called with the kind of the model whose probability is about to be returned
    std::function<void(const std::string& model_id, ModelKind kind, const std::string& engine)> on_scored;
  };

  Service(ModelRegistry registry, RoutingConfig cfg, std::uint64_t seed = 42, Hooks hooks = {})
      : registry_(std::move(registry)), cfg_(std::move(cfg)), hooks_(std::move(hooks)), rng_(seed),
        quantum_up_(cfg_.quantum_enabled) {
    validate();
  }

  const RoutingConfig& config() const { return cfg_; }
  const ModelRegistry& registry() const { return registry_; }

  void set_quantum_path(bool up) { quantum_up_ = up; }
  bool quantum_path_up() const { return quantum_up_; }

  /// Surrogate used when `quantum_id` cannot answer.
  std::string surrogate_for(const std::string& quantum_id) const {
    const auto it = cfg_.fallback_map.find(quantum_id);
    return it != cfg_.fallback_map.end() ? it->second : cfg_.default_surrogate;
  }

  /// `draw` is a uniform value in [0, 1) consumed only by "auto" requests.
  std::string route(const PredictRequest& req, double draw) const {
    const std::string& want = req.requested_model.empty() ? std::string("auto") : req.requested_model;
    if (want != "auto") {
      if (!registry_.find(want)) throw Error(Errc::UnknownModel, "model '" + want + "' is not loaded");
      return want;
    }
    if (cfg_.ab_weights.empty()) return cfg_.default_model;
    double total = 0.0;
    for (const auto& [id, w] : cfg_.ab_weights) total += w;
    const double target = std::clamp(draw, 0.0, 1.0) * total;
    double acc = 0.0;
    std::string last;
    for (const auto& [id, w] : cfg_.ab_weights) {
      if (w <= 0.0) continue;
      acc += w;
      last = id;
      if (target < acc) return id;
    }
    return last;
  }

  PredictResponse predict_with_fallback(const PredictRequest& req, const std::string& model_id) const {
    const auto start = std::chrono::steady_clock::now();
    const auto art = registry_.find(model_id);
    if (!art) throw Error(Errc::UnknownModel, "model '" + model_id + "' is not loaded");

    PredictResponse resp;
    resp.request_id = req.request_id;
    std::optional<double> quantum_p;
    if (art->model.quantum() && quantum_up_) quantum_p = run_quantum(art, features_for(req, *art));

    if (!art->model.quantum()) {
      score_classical(req, art, resp);
    } else if (quantum_p) {
      resp.model_id = art->id;
      resp.engine = "quantum";
      resp.probability = *quantum_p;
      if (hooks_.on_scored) hooks_.on_scored(art->id, art->model.kind(), resp.engine);
    } else {
      score_classical(req, registry_.find(surrogate_for(model_id)), resp);
      resp.fallback_used = true;
    }
    resp.prediction = resp.probability >= 0.5 ? 1 : 0;
    resp.latency = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return resp;
  }

  PredictResponse predict(const PredictRequest& req, double draw) const {
    return predict_with_fallback(req, route(req, draw));
  }

  /// Draws the routing value from the service's own seeded generator.
  PredictResponse predict(const PredictRequest& req) const {
    double draw = 0.0;
    {
      std::lock_guard lock(rng_mutex_);
      draw = uniform01(rng_);
    }
    return predict(req, draw);
  }

  json models_json() const {
    json out = json::array();
    for (const auto& [id, a] : registry_.all()) {
      json m = {{"id", id},
                {"kind", to_string(a->model.kind())},
                {"engine", a->model.quantum() ? "quantum" : "classical"},
                {"schema_version", a->schema_version()},
                {"input_width", a->model.input_width}};
      if (a->model.quantum()) m["fallback"] = surrogate_for(id);
      out.push_back(m);
    }
    return out;
  }

  json health_json() const {
    std::size_t quantum = 0;
    for (const auto& [id, a] : registry_.all()) quantum += a->model.quantum() ? 1 : 0;
    return {{"status", "ok"},
            {"models", registry_.all().size()},
            {"quantum_models", quantum},
            {"quantum_enabled", cfg_.quantum_enabled},
            {"quantum_path", quantum_up_ ? "up" : "down"},
            {"quantum_timeout", cfg_.quantum_timeout.count()}};
  }

 private:
  void validate() const {
    if (registry_.all().empty()) throw Error(Errc::BadConfig, "no models loaded");
    if (!registry_.find(cfg_.default_model)) {
      throw Error(Errc::UnknownModel, "default_model '" + cfg_.default_model + "' is not loaded");
    }
    double total = 0.0;
    for (const auto& [id, w] : cfg_.ab_weights) {
      if (!registry_.find(id)) throw Error(Errc::UnknownModel, "ab_weights names unloaded model '" + id + "'");
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(Errc::BadConfig, "ab weight for '" + id + "' must be >= 0");
      total += w;
    }
    if (!cfg_.ab_weights.empty() && !(total > 0.0)) throw Error(Errc::BadConfig, "ab_weights sum to zero");
    if (cfg_.quantum_timeout.count() <= 0) throw Error(Errc::BadConfig, "quantum_timeout must be positive");
    for (const auto& [id, a] : registry_.all()) {
      if (!a->model.quantum()) continue;
      const auto target = registry_.find(surrogate_for(id));
      if (!target || target->model.quantum()) {
        throw Error(Errc::NoFallbackConfigured, "quantum model '" + id + "' has no loaded classical surrogate");
      }
    }
    for (const auto& [q, c] : cfg_.fallback_map) {
      const auto target = registry_.find(c);
      if (!target || target->model.quantum()) {
        throw Error(Errc::NoFallbackConfigured, "fallback for '" + q + "' names '" + c + "', not a loaded classical model");
      }
    }
  }

  static std::vector<double> features_for(const PredictRequest& req, const ModelArtifact& a) {
    if (req.schema_version && *req.schema_version != a.schema_version()) {
      throw Error(Errc::SchemaMismatch, "request schema_version " + std::to_string(*req.schema_version) +
                                            ", model '" + a.id + "' expects " + std::to_string(a.schema_version()));
    }
    if (req.feature_vector) {
      if (req.feature_vector->size() != a.model.input_width) {
        throw Error(Errc::DimensionMismatch, "model '" + a.id + "' expects " + std::to_string(a.model.input_width) +
                                                 " features, got " + std::to_string(req.feature_vector->size()));
      }
      return *req.feature_vector;
    }
    if (!req.transaction) throw Error(Errc::BadRequest, "request carries no features");
    if (!a.schema) throw Error(Errc::SchemaMismatch, "model '" + a.id + "' has no feature schema for raw transactions");
    return extract_features(*req.transaction, req.from_account_state, req.to_account_state, req.pair_state, *a.schema,
                            UnknownCategory::Zeros);
  }

  void score_classical(const PredictRequest& req, const std::shared_ptr<const ModelArtifact>& art,
                       PredictResponse& resp) const {
    resp.model_id = art->id;
    resp.engine = "classical";
    resp.probability = art->model.predict_proba(features_for(req, *art));
    if (hooks_.on_scored) hooks_.on_scored(art->id, art->model.kind(), resp.engine);
  }

  /// Scores on a detached worker so a stalled backend cannot hold the request past the timeout.
  /// Returns nothing on timeout or failure.
  std::optional<double> run_quantum(std::shared_ptr<const ModelArtifact> art, std::vector<double> x) const {
    auto promise = std::make_shared<std::promise<double>>();
    auto result = promise->get_future();
    std::thread([art, x = std::move(x), promise, hook = hooks_.before_quantum] {
      try {
        if (hook) hook(art->id);
        promise->set_value(art->model.predict_proba(x));
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    }).detach();
    if (result.wait_for(cfg_.quantum_timeout) != std::future_status::ready) return std::nullopt;
    try {
      return result.get();
    } catch (...) {
      return std::nullopt;
    }
  }

  ModelRegistry registry_;
  RoutingConfig cfg_;
  Hooks hooks_;
  mutable std::mutex rng_mutex_;
  mutable Rng rng_;
  std::atomic<bool> quantum_up_;
};

}  // namespace fd4qc::service
