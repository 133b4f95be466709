// fd4qc: featurize, train, benchmark and serve from the command line.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fd4qc/benchmark.hpp"
#include "fd4qc/features.hpp"
#include "fd4qc/http.hpp"
#include "fd4qc/model.hpp"
#include "fd4qc/service.hpp"
#include "fd4qc/synth.hpp"

namespace fs = std::filesystem;
using namespace fd4qc;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(Errc::Io, "cannot create directory '" + dir.string() + "'");
}

void require_readable(const std::string& path) {
  if (!fs::is_regular_file(path)) throw Error(Errc::Io, "cannot read '" + path + "'");
}

// ---------------------------------------------------------------------------

struct FeaturizeArgs {
  std::string input;
  std::string out_dir = ".";
  std::string schema_in;
  bool lenient = false;
  bool no_header = false;
  FeatureConfig config;
};

int cmd_featurize(const FeaturizeArgs& a) {
  require_readable(a.input);
  ensure_dir(a.out_dir);
  ReadOptions ro;
  ro.strict = !a.lenient;
  ro.has_header = !a.no_header;
  auto read = read_transactions(a.input, ro);
  sort_by_time(read.transactions);
  FeaturizeOptions fo;
  fo.config = a.config;
  if (!a.schema_in.empty()) fo.schema = load_schema(a.schema_in);
  for (const auto& s : read.skipped) std::cerr << "skipped line " << s.line << ": " << s.message << '\n';
  const auto stream = featurize_stream(read.transactions, fo);
  const fs::path dir(a.out_dir);
  write_feature_csv((dir / "features.csv").string(), stream.schema, stream.rows);
  save_schema((dir / "schema.json").string(), stream.schema);
  write_state_snapshot((dir / "state.jsonl").string(), stream.state);
  std::cout << "featurized " << stream.rows.size() << " rows (" << read.skipped.size() << " skipped), "
            << stream.schema.width() << " features, schema version " << stream.schema.version << " -> "
            << dir.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string features;
  std::string schema;
  std::string model;
  std::string output;
  std::string id;
  std::uint64_t seed = 42;
  int qubits = 0;
  int layers = 0;
  int epochs = 0;
  int trees = 0;
  int depth = 0;
  int rounds = 0;
  double C = 0.0;
  double lr = 0.0;
};

void apply_overrides(TrainConfig& tc, const TrainArgs& a) {
  tc.set_seed(a.seed);
  if (a.qubits > 0) tc.qsvc.qubits = tc.vqc.qubits = tc.hqnn.qubits = a.qubits;
  if (a.layers > 0) tc.vqc.layers = tc.hqnn.layers = a.layers;
  if (a.epochs > 0) tc.lr.epochs = tc.vqc.epochs = tc.hqnn.epochs = a.epochs;
  if (a.trees > 0) tc.rf.n_trees = a.trees;
  if (a.depth > 0) tc.dt.max_depth = tc.rf.max_depth = tc.gbt.depth = a.depth;
  if (a.rounds > 0) tc.gbt.rounds = a.rounds;
  if (a.C > 0.0) tc.qsvc.C = a.C;
  if (a.lr > 0.0) tc.lr.learning_rate = tc.vqc.learning_rate = tc.hqnn.learning_rate = a.lr;
}

int cmd_train(const TrainArgs& a) {
  ModelSpec spec;
  try {
    spec = parse_model_spec(a.model);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  require_readable(a.features);
  const auto fm = read_feature_csv(a.features);
  std::optional<FeatureSchema> schema;
  std::string schema_path = a.schema;
  if (schema_path.empty()) {
    const auto sidecar = fs::path(a.features).parent_path() / "schema.json";
    if (fs::is_regular_file(sidecar)) schema_path = sidecar.string();
  }
  if (!schema_path.empty()) {
    schema = load_schema(schema_path);
    std::vector<std::string> names;
    for (const auto& c : schema->columns) names.push_back(c.name);
    if (names != fm.names) throw Error(Errc::SchemaMismatch, "feature file columns differ from schema");
  }
  const Dataset d = to_dataset(fm.rows);
  TrainConfig tc;
  apply_overrides(tc, a);
  ModelArtifact art;
  art.id = a.id.empty() ? a.model : a.id;
  art.schema = schema;
  art.model = train_model(spec, d.x, d.y, tc);
  save_artifact(a.output, art);

  std::vector<int> pred(d.y.size());
  for (std::size_t r = 0; r < d.x.rows(); ++r) pred[r] = predict(art.model, d.x.row(r)).label;
  const auto m = metrics(confusion(d.y, pred));
  std::cout << "trained " << art.id << " (" << to_string(art.model.kind()) << ") on " << d.y.size() << " rows -> "
            << a.output << '\n'
            << "training set: accuracy " << m.accuracy << ", f_measure " << m.f_measure << ", precision "
            << m.precision << ", recall " << m.recall << ", fpr " << m.fpr << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
  std::string dataset;
  std::size_t synthetic = 0;
  std::string models = "all";
  std::string out_dir = "benchmark_out";
  BenchmarkConfig cfg;
  bool no_header = false;
};

std::vector<std::string> parse_model_list(const std::string& s) {
  if (s == "all") return comparison_models();
  if (s == "classical") return classical_models();
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    try {
      parse_model_spec(item);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    out.push_back(item);
  }
  if (out.empty()) throw UsageError("no models given");
  return out;
}

int cmd_benchmark(BenchmarkArgs a) {
  a.cfg.models = parse_model_list(a.models);
  if (a.dataset.empty() == (a.synthetic == 0)) throw UsageError("give exactly one of --dataset or --synthetic");
  std::vector<Transaction> txs;
  if (!a.dataset.empty()) {
    require_readable(a.dataset);
    ReadOptions ro;
    ro.has_header = !a.no_header;
    txs = read_transactions(a.dataset, ro).transactions;
  } else {
    SynthConfig sc;
    sc.transactions = a.synthetic;
    sc.accounts = std::max<std::size_t>(16, a.synthetic / 10);
    sc.seed = a.cfg.seed;
    txs = synthesize_transactions(sc);
  }
  ensure_dir(a.out_dir);
  const auto res = run_benchmark(std::move(txs), a.cfg);
  const fs::path dir(a.out_dir);
  write_text(dir / "report.csv", report_csv(res));
  write_text(dir / "timings.csv", timings_csv(res));
  write_text(dir / "report.txt", report_text(res));
  write_text(dir / "confusion.txt", confusion_dump(res));
  std::cout << report_text(res);
  return kOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string output;
  SynthConfig cfg;
};

int cmd_synth(const SynthArgs& a) {
  const auto txs = synthesize_transactions(a.cfg);
  write_transactions(a.output, txs);
  std::size_t pos = 0;
  for (const auto& t : txs) pos += static_cast<std::size_t>(t.label);
  std::cout << "wrote " << txs.size() << " transactions (" << pos << " laundering) -> " << a.output << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string config;
  std::string models_dir;
  int port = -1;
  std::string host;
};

service::HttpServer* g_server = nullptr;

int cmd_serve(const ServeArgs& a) {
  service::ServerConfig cfg;
  if (!a.config.empty()) cfg = service::load_server_config(a.config);
  service::apply_env_overrides(cfg);
  if (!a.models_dir.empty()) cfg.models_dir = a.models_dir;
  if (a.port >= 0) cfg.port = a.port;
  if (!a.host.empty()) cfg.host = a.host;

  auto registry = service::ModelRegistry::load_directory(cfg.models_dir);
  auto svc = std::make_shared<const service::Service>(std::move(registry), cfg.routing, cfg.seed);
  service::HttpServer server(svc);
  const int port = server.bind(cfg.host, cfg.port);
  if (port < 0) throw Error(Errc::Io, "cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  std::cout << "serving " << svc->registry().all().size() << " models on " << cfg.host << ':' << port
            << " (quantum " << (cfg.routing.quantum_enabled ? "enabled" : "disabled") << ")" << std::endl;
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.listen();
  g_server = nullptr;
  return kOk;
}

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::UnknownModel:
    case Errc::BadConfig: return kUsage;
    default: return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fd4qc: transaction featurization, classical and simulated-quantum fraud models, scoring service.\n"
               "Feature schema version " +
               std::to_string(kFeatureSchemaVersion) + "."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fd4qc feature schema version " + std::to_string(kFeatureSchemaVersion));

  FeaturizeArgs fz;
  auto* featurize = app.add_subcommand(
      "featurize", "Raw transaction CSV -> features.csv, schema.json (schema version " +
                       std::to_string(kFeatureSchemaVersion) + ") and state.jsonl");
  featurize->add_option("-i,--input", fz.input, "Raw transaction CSV (plain or gzip)")->required();
  featurize->add_option("-o,--out-dir", fz.out_dir, "Output directory")->capture_default_str();
  featurize->add_option("--schema", fz.schema_in, "Frozen schema to featurize against");
  featurize->add_flag("--lenient", fz.lenient, "Skip malformed rows instead of failing");
  featurize->add_flag("--no-header", fz.no_header, "Input has no header row");
  featurize->add_option("--ewma-alpha", fz.config.ewma_alpha, "EWMA smoothing factor")->capture_default_str();
  featurize->add_option("--cold-start-seconds", fz.config.cold_start_seconds, "Recency value for unseen history")
      ->capture_default_str();
  featurize->add_flag("--receiver-change-flags", fz.config.receiver_change_flags,
                      "Add receiver-side currency/format change flags");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Fit one model on a feature CSV and write its artifact");
  train->add_option("-f,--features", tr.features, "Feature CSV from `featurize`")->required();
  train->add_option("--schema", tr.schema, "Schema sidecar (defaults to schema.json next to the features)");
  train->add_option("-m,--model", tr.model, "lr | dt | rf | xgb | qsvc[-Nq] | vqc[-Nl][-Nq] | hqnn[-Nl][-Nq]")
      ->required();
  train->add_option("-o,--output", tr.output, "Artifact path")->required();
  train->add_option("--id", tr.id, "Model id stored in the artifact (defaults to --model)");
  train->add_option("--seed", tr.seed, "Seed")->capture_default_str();
  train->add_option("--qubits", tr.qubits, "Qubits for quantum models");
  train->add_option("--layers", tr.layers, "Ansatz layers for vqc/hqnn");
  train->add_option("--epochs", tr.epochs, "Training epochs (lr, vqc, hqnn)");
  train->add_option("--trees", tr.trees, "Random forest size");
  train->add_option("--depth", tr.depth, "Tree depth (dt, rf, xgb)");
  train->add_option("--rounds", tr.rounds, "Boosting rounds");
  train->add_option("--C", tr.C, "Box constraint for qsvc");
  train->add_option("--lr", tr.lr, "Learning rate (lr, vqc, hqnn)");

  BenchmarkArgs bm;
  auto* bench = app.add_subcommand("benchmark", "Undersample, split, fit every model, report the five metrics");
  bench->add_option("-d,--dataset", bm.dataset, "IBM AML-layout transaction CSV (plain or gzip)");
  bench->add_option("--synthetic", bm.synthetic, "Use a generated stream with this many transactions instead");
  bench->add_flag("--no-header", bm.no_header, "Dataset has no header row");
  bench->add_option("--models", bm.models, "all | classical | comma-separated model ids")->capture_default_str();
  bench->add_option("--subsample", bm.cfg.subsample, "Rows after undersampling")->capture_default_str();
  bench->add_option("--ratio", bm.cfg.ratio, "Negatives per positive")->capture_default_str();
  bench->add_option("--test-fraction", bm.cfg.test_fraction, "Holdout fraction")->capture_default_str();
  bench->add_option("--quantum-rows", bm.cfg.quantum_train_rows, "Training rows for quantum models")
      ->capture_default_str();
  bench->add_option("--seed", bm.cfg.seed, "Seed")->capture_default_str();
  bench->add_option("-o,--out-dir", bm.out_dir, "Report directory")->capture_default_str();

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP scoring service");
  serve->add_option("--config", sv.config, "Routing config (JSON)");
  serve->add_option("--models-dir", sv.models_dir, "Directory of model artifacts");
  serve->add_option("--port", sv.port, "Port (0 picks a free one)");
  serve->add_option("--host", sv.host, "Bind address");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Write a synthetic transaction CSV in the IBM AML layout");
  synth->add_option("-o,--output", sy.output, "Output CSV (.gz is not implied)")->required();
  synth->add_option("--transactions", sy.cfg.transactions, "Rows")->capture_default_str();
  synth->add_option("--accounts", sy.cfg.accounts, "Accounts")->capture_default_str();
  synth->add_option("--laundering-fraction", sy.cfg.laundering_fraction, "Share of laundering rows")
      ->capture_default_str();
  synth->add_option("--seed", sy.cfg.seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (featurize->parsed()) return cmd_featurize(fz);
    if (train->parsed()) return cmd_train(tr);
    if (bench->parsed()) return cmd_benchmark(bm);
    if (serve->parsed()) return cmd_serve(sv);
    if (synth->parsed()) return cmd_synth(sy);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
