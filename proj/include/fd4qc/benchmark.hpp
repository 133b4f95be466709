#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fd4qc/features.hpp"
#include "fd4qc/metrics.hpp"
#include "fd4qc/model.hpp"

namespace fd4qc {

/// The ten-model comparison: four classical learners and six quantum configurations.
inline std::vector<std::string> comparison_models() {
  return {"lr",         "dt",         "rf",         "xgb",     "vqc-1l-4q",
          "vqc-2l-4q",  "hqnn-1l-4q", "hqnn-2l-4q", "qsvc-2q", "qsvc-4q"};
}

inline std::vector<std::string> classical_models() { return {"lr", "dt", "rf", "xgb"}; }

struct BenchmarkConfig {
  std::vector<std::string> models = comparison_models();
  /// rows in the undersampled dataset (positives are capped at subsample / (ratio + 1))
  std::size_t subsample = 20000;
  int ratio = 9;
  double test_fraction = 0.2;
  /// quantum learners train on a stratified subset of at most this many training rows
  std::size_t quantum_train_rows = 1000;
  std::uint64_t seed = 42;
  FeatureConfig features;
  TrainConfig train;
};

struct BenchmarkResult {
  std::vector<MetricsReport> reports;
  std::size_t stream_rows = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t test_positives = 0;
  std::size_t feature_width = 0;
};

/// Everything up to model fitting: featurize the whole stream, undersample, split.
struct PreparedData {
  FeatureSchema schema;
  DatasetSplit split;
  std::size_t stream_rows = 0;
};

inline PreparedData prepare_benchmark_data(std::vector<Transaction> txs, const BenchmarkConfig& cfg) {
  if (cfg.ratio < 1 || cfg.subsample < static_cast<std::size_t>(cfg.ratio) + 1) {
    throw Error(Errc::BadConfig, "subsample must hold at least one positive at the configured ratio");
  }
  sort_by_time(txs);
  // choose rows on labels alone, then featurize the full history and keep only the chosen rows
  std::vector<LabeledRow> pos, all_neg;
  for (std::size_t i = 0; i < txs.size(); ++i) (txs[i].label ? pos : all_neg).push_back({i, txs[i].timestamp, txs[i].label, {}});
  if (pos.empty()) throw Error(Errc::NoPositives, "dataset has no laundering rows");
  const std::size_t max_pos = cfg.subsample / static_cast<std::size_t>(cfg.ratio + 1);
  Rng rng(mix_seed(cfg.seed, 0xBE));
  std::vector<LabeledRow> pool;
  if (pos.size() > max_pos) {
    for (auto k : sample_without_replacement(pos.size(), max_pos, rng)) pool.push_back(pos[k]);
  } else {
    pool = pos;
  }
  pool.insert(pool.end(), all_neg.begin(), all_neg.end());
  const auto chosen = undersample(pool, cfg.ratio, cfg.seed);

  FeaturizeOptions opts;
  opts.config = cfg.features;
  opts.emit.assign(txs.size(), false);
  for (const auto& r : chosen) opts.emit[r.id] = true;
  auto stream = featurize_stream(txs, opts);

  PreparedData out;
  out.stream_rows = txs.size();
  out.schema = stream.schema;
  out.split = stratified_split(stream.rows, cfg.test_fraction, cfg.seed);
  out.split.ratio_negative_per_positive = cfg.ratio;
  return out;
}

inline BenchmarkResult run_benchmark(const PreparedData& data, const BenchmarkConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const Dataset train = to_dataset(data.split.train);
  const Dataset test = to_dataset(data.split.test);
  Dataset quantum_train = train;
  if (train.y.size() > cfg.quantum_train_rows) {
    const double f = static_cast<double>(cfg.quantum_train_rows) / static_cast<double>(train.y.size());
    quantum_train = to_dataset(stratified_split(data.split.train, f, mix_seed(cfg.seed, 0x9A)).test);
  }
  TrainConfig tc = cfg.train;
  tc.set_seed(cfg.seed);

  BenchmarkResult res;
  res.stream_rows = data.stream_rows;
  res.train_rows = train.y.size();
  res.test_rows = test.y.size();
  for (int v : test.y) res.test_positives += static_cast<std::size_t>(v);
  res.feature_width = data.schema.width();

  for (const auto& id : cfg.models) {
    const ModelSpec spec = parse_model_spec(id);
    const Dataset& d = is_quantum(spec.kind) ? quantum_train : train;
    const auto t0 = clock::now();
    const TrainedModel model = train_model(spec, d.x, d.y, tc);
    const auto t1 = clock::now();
    std::vector<int> pred(test.y.size());
    for (std::size_t r = 0; r < test.x.rows(); ++r) pred[r] = predict(model, test.x.row(r)).label;
    const auto t2 = clock::now();
    MetricsReport m = metrics(confusion(test.y, pred));
    m.model_id = id;
    m.wall_time_train = std::chrono::duration<double>(t1 - t0).count();
    m.wall_time_infer = std::chrono::duration<double>(t2 - t1).count();
    res.reports.push_back(m);
  }
  return res;
}

inline BenchmarkResult run_benchmark(std::vector<Transaction> txs, const BenchmarkConfig& cfg) {
  return run_benchmark(prepare_benchmark_data(std::move(txs), cfg), cfg);
}

inline BenchmarkResult run_benchmark(const std::string& dataset_path, const BenchmarkConfig& cfg,
                                     const ReadOptions& read = {}) {
  return run_benchmark(read_transactions(dataset_path, read).transactions, cfg);
}

// ---------------------------------------------------------------------------
// Reports

/// Metrics and confusion counts only, so reruns with the same seed are byte-identical.
inline std::string report_csv(const BenchmarkResult& r) {
  std::ostringstream out;
  out << "model,accuracy,f_measure,precision,recall,fpr,tp,fp,tn,fn\n";
  for (const auto& m : r.reports) {
    out << m.model_id << ',' << format_double(m.accuracy) << ',' << format_double(m.f_measure) << ','
        << format_double(m.precision) << ',' << format_double(m.recall) << ',' << format_double(m.fpr) << ','
        << m.counts.tp << ',' << m.counts.fp << ',' << m.counts.tn << ',' << m.counts.fn << '\n';
  }
  return out.str();
}

inline std::string timings_csv(const BenchmarkResult& r) {
  std::ostringstream out;
  out << "model,train_seconds,infer_seconds\n";
  for (const auto& m : r.reports) {
    out << m.model_id << ',' << format_double(m.wall_time_train) << ',' << format_double(m.wall_time_infer) << '\n';
  }
  return out.str();
}

inline std::string report_text(const BenchmarkResult& r) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s %9s %10s %10s\n", "Model", "Accuracy", "F-measure",
                "Precision", "Recall", "FPR", "Train(s)", "Infer(s)");
  out << line;
  for (const auto& m : r.reports) {
    std::snprintf(line, sizeof line, "%-12s %9.4f %9.4f %9.4f %9.4f %9.4f %10.3f %10.3f\n", m.model_id.c_str(),
                  m.accuracy, m.f_measure, m.precision, m.recall, m.fpr, m.wall_time_train, m.wall_time_infer);
    out << line;
  }
  out << "train rows " << r.train_rows << ", test rows " << r.test_rows << " (" << r.test_positives
      << " positive), " << r.feature_width << " features, " << r.stream_rows << " stream rows\n";
  return out.str();
}

inline std::string confusion_dump(const BenchmarkResult& r) {
  std::ostringstream out;
  for (const auto& m : r.reports) {
    out << m.model_id << ": tp=" << m.counts.tp << " fp=" << m.counts.fp << " tn=" << m.counts.tn
        << " fn=" << m.counts.fn << '\n';
  }
  return out.str();
}

}  // namespace fd4qc
