#include <gtest/gtest.h>

#include <random>

#include "fd4qc/benchmark.hpp"
#include "fd4qc/synth.hpp"

#include "support/oracles.hpp"

using namespace fd4qc;

namespace {

std::vector<Transaction> bench_stream() {
  SynthConfig cfg;
  cfg.transactions = 12000;
  cfg.accounts = 1200;
  cfg.banks = 40;
  cfg.days = 4;
  cfg.laundering_fraction = 0.03;
  cfg.seed = 21;
  return synthesize_transactions(cfg);
}

BenchmarkConfig small_config() {
  BenchmarkConfig cfg;
  cfg.models = classical_models();
  cfg.subsample = 2000;
  cfg.train.rf.n_trees = 20;
  cfg.train.gbt.rounds = 20;
  return cfg;
}

}  // namespace

TEST(Confusion, Examples) {
  EXPECT_EQ(confusion({1, 0}, {1, 0}), (ConfusionMatrix{1, 0, 1, 0}));
  const auto cm = confusion({1, 0, 1, 0}, {0, 0, 0, 0});
  EXPECT_EQ(cm.tp, 0);
  EXPECT_EQ(cm.fp, 0);
  EXPECT_THROW(confusion({1}, {1, 0}), Error);
  EXPECT_THROW(confusion({2}, {1}), Error);
}

TEST(Metrics, HandArithmetic) {
  const auto m = metrics({9, 1, 89, 1});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.98);
  EXPECT_DOUBLE_EQ(m.precision, 0.9);
  EXPECT_DOUBLE_EQ(m.recall, 0.9);
  EXPECT_DOUBLE_EQ(m.f_measure, 0.9);
  EXPECT_DOUBLE_EQ(m.fpr, 1.0 / 90.0);
}

TEST(Metrics, AllNegativePredictorOnNineToOne) {
  std::vector<int> y(1000, 0);
  for (std::size_t i = 0; i < 100; ++i) y[i * 10] = 1;
  const auto m = metrics(confusion(y, std::vector<int>(1000, 0)));
  EXPECT_EQ(m.accuracy, 0.9);
  EXPECT_EQ(m.f_measure, 0.0);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.fpr, 0.0);
}

TEST(Metrics, AllPositiveCorrect) {
  const auto m = metrics({5, 0, 0, 0});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f_measure, 1.0);
  EXPECT_EQ(m.fpr, 0.0);
  EXPECT_THROW(metrics({}), Error);
}

TEST(Metrics, MatchNaiveOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> y(1000), p(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
      y[i] = static_cast<int>(rng() % 2);
      p[i] = static_cast<int>(rng() % 2);
    }
    const auto cm = confusion(y, p);
    const auto o = oracle::naive_counts(y, p);
    EXPECT_EQ(cm.tp, o.tp);
    EXPECT_EQ(cm.fp, o.fp);
    EXPECT_EQ(cm.tn, o.tn);
    EXPECT_EQ(cm.fn, o.fn);
    const auto m = metrics(cm);
    const double prec = o.tp + o.fp ? double(o.tp) / double(o.tp + o.fp) : 0.0;
    const double rec = o.tp + o.fn ? double(o.tp) / double(o.tp + o.fn) : 0.0;
    EXPECT_EQ(m.accuracy, double(o.tp + o.tn) / 1000.0);
    EXPECT_EQ(m.precision, prec);
    EXPECT_EQ(m.recall, rec);
    EXPECT_EQ(m.f_measure, prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0);
    EXPECT_EQ(m.fpr, o.fp + o.tn ? double(o.fp) / double(o.fp + o.tn) : 0.0);
  }
}

TEST(Benchmark, PreparedDataKeepsRatioAndHistory) {
  const auto txs = bench_stream();
  const auto cfg = small_config();
  const auto data = prepare_benchmark_data(txs, cfg);
  const auto n_test = data.split.test.size(), n_train = data.split.train.size();
  EXPECT_EQ(n_test + n_train, 2000u);
  std::size_t pos = 0;
  for (const auto& r : data.split.train) pos += r.label;
  for (const auto& r : data.split.test) pos += r.label;
  EXPECT_EQ(pos, 200u);
  EXPECT_EQ(data.stream_rows, txs.size());

  // emitted rows carry features computed over the whole stream, not just the chosen rows
  auto sorted = txs;
  sort_by_time(sorted);
  const auto full = featurize_stream(sorted);
  for (std::size_t k = 0; k < data.split.test.size(); k += 25) {
    const auto& r = data.split.test[k];
    EXPECT_EQ(r.features, full.rows[r.id].features);
  }
}

TEST(Benchmark, ClassicalReportShapeAndDeterminism) {
  const auto txs = bench_stream();
  const auto cfg = small_config();
  const auto a = run_benchmark(txs, cfg);
  ASSERT_EQ(a.reports.size(), 4u);
  for (const auto& m : a.reports) {
    for (double v : {m.accuracy, m.f_measure, m.precision, m.recall, m.fpr}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(m.counts.total(), static_cast<std::int64_t>(a.test_rows));
  }
  const auto b = run_benchmark(txs, cfg);
  EXPECT_EQ(report_csv(a), report_csv(b));
  EXPECT_EQ(report_csv(a).substr(0, 6), "model,");
}

TEST(Benchmark, FullModelSetHasTenRows) {
  auto cfg = small_config();
  cfg.models = comparison_models();
  cfg.subsample = 300;
  cfg.quantum_train_rows = 60;
  cfg.train.vqc.epochs = 1;
  cfg.train.hqnn.epochs = 1;
  const auto r = run_benchmark(bench_stream(), cfg);
  ASSERT_EQ(r.reports.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(r.reports[i].model_id, comparison_models()[i]);
}

TEST(Benchmark, ConfigErrors) {
  auto cfg = small_config();
  cfg.subsample = 5;
  EXPECT_THROW(prepare_benchmark_data(bench_stream(), cfg), Error);
  cfg = small_config();
  cfg.models = {"nope"};
  EXPECT_THROW(run_benchmark(bench_stream(), cfg), Error);
  auto no_pos = bench_stream();
  for (auto& t : no_pos) t.label = 0;
  try {
    prepare_benchmark_data(no_pos, small_config());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoPositives);
  }
}
