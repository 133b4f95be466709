#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "fd4qc/error.hpp"
#include "fd4qc/ingest.hpp"
#include "fd4qc/running_stats.hpp"

namespace fd4qc {

inline constexpr int kFeatureSchemaVersion = 1;

struct CategoryCount {
  std::int64_t count = 0;
  /// role-local sequence number of the most recent occurrence (breaks modal ties)
  std::int64_t last_seen = 0;

  bool operator==(const CategoryCount&) const = default;
};

using Histogram = std::map<std::string, CategoryCount>;

/// Most frequent category; the most recently seen one wins ties.
inline std::optional<std::string> modal_category(const Histogram& h) {
  const std::pair<const std::string, CategoryCount>* best = nullptr;
  for (const auto& entry : h) {
    if (!best || entry.second.count > best->second.count ||
        (entry.second.count == best->second.count && entry.second.last_seen > best->second.last_seen)) {
      best = &entry;
    }
  }
  if (!best) return std::nullopt;
  return best->first;
}

struct AccountState {
  RunningStats as_sender;
  RunningStats as_receiver;
  std::optional<std::int64_t> last_tx_time_as_sender;
  std::optional<std::int64_t> last_tx_time_as_receiver;
  std::optional<double> ewma_amount_sent;
  std::optional<double> ewma_amount_received;
  std::optional<double> ewma_interarrival;
  // sending activity
  Histogram currency_histogram;
  Histogram format_histogram;
  // receiving activity (only read when receiver change flags are enabled)
  Histogram recv_currency_histogram;
  Histogram recv_format_histogram;

  std::optional<std::int64_t> last_activity() const {
    if (last_tx_time_as_sender && last_tx_time_as_receiver) {
      return std::max(*last_tx_time_as_sender, *last_tx_time_as_receiver);
    }
    return last_tx_time_as_sender ? last_tx_time_as_sender : last_tx_time_as_receiver;
  }

  bool operator==(const AccountState&) const = default;
};

/// Bilateral history of the ordered pair (a, b): `ab` is a -> b flow, `ba` the reverse.
struct PairState {
  std::int64_t count_ab = 0;
  double sum_amount_ab = 0.0;
  double sum_amount_ba = 0.0;
  std::optional<std::int64_t> last_pair_tx_time;
  double mean_amount_ab = 0.0;

  bool operator==(const PairState&) const = default;
};

/// Signed balance of bilateral flow in [-1, 1]; 0 when there is no flow at all.
inline double pair_equilibrium(double sum_ab, double sum_ba) {
  const double total = sum_ab + sum_ba;
  if (total <= 0.0) return 0.0;
  return std::clamp((sum_ab - sum_ba) / total, -1.0, 1.0);
}

struct FeatureConfig {
  double ewma_alpha = 0.3;
  /// time-since-last value used before an account has any history
  double cold_start_seconds = 1e7;
  bool receiver_change_flags = false;
  /// raise OutOfOrder instead of accepting a timestamp earlier than an account's last activity
  bool strict_order = false;

  bool operator==(const FeatureConfig&) const = default;
};

enum class FeatureKind { Numeric, OneHot, Flag };

inline std::string to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::OneHot: return "one-hot";
    case FeatureKind::Flag: return "flag";
  }
  return "numeric";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "numeric") return FeatureKind::Numeric;
  if (s == "one-hot") return FeatureKind::OneHot;
  if (s == "flag") return FeatureKind::Flag;
  throw Error(Errc::BadArtifact, "unknown feature kind '" + s + "'");
}

struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;

  bool operator==(const FeatureColumn&) const = default;
};

/// Ordered column layout plus the frozen one-hot vocabularies it was built from.
struct FeatureSchema {
  int version = kFeatureSchemaVersion;
  FeatureConfig config;
  std::vector<std::string> currency_vocab;
  std::vector<std::string> format_vocab;
  std::vector<FeatureColumn> columns;

  std::size_t width() const { return columns.size(); }

  std::optional<std::size_t> index_of(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == name) return i;
    }
    return std::nullopt;
  }

  bool operator==(const FeatureSchema&) const = default;
};

inline FeatureSchema make_schema(std::vector<std::string> currency_vocab, std::vector<std::string> format_vocab,
                                 const FeatureConfig& config = {}) {
  std::sort(currency_vocab.begin(), currency_vocab.end());
  currency_vocab.erase(std::unique(currency_vocab.begin(), currency_vocab.end()), currency_vocab.end());
  std::sort(format_vocab.begin(), format_vocab.end());
  format_vocab.erase(std::unique(format_vocab.begin(), format_vocab.end()), format_vocab.end());

  FeatureSchema s;
  s.config = config;
  s.currency_vocab = currency_vocab;
  s.format_vocab = format_vocab;
  auto num = [&](std::string n) { s.columns.push_back({std::move(n), FeatureKind::Numeric}); };
  auto flag = [&](std::string n) { s.columns.push_back({std::move(n), FeatureKind::Flag}); };

  num("amount_paid");
  num("amount_received");
  for (const char* who : {"from", "to"}) {
    for (const char* role : {"sent", "recv"}) {
      for (const char* stat : {"count", "mean", "std", "max", "min"}) {
        num(std::string(who) + "_" + role + "_" + stat);
      }
    }
  }
  num("from_secs_since_last_sent");
  num("to_secs_since_last_recv");
  num("from_ewma_amount_sent");
  num("to_ewma_amount_recv");
  num("from_ewma_interarrival");
  num("to_ewma_interarrival");
  flag("same_bank");
  flag("is_self_loop");
  flag("cross_currency");
  flag("from_currency_change");
  flag("from_format_change");
  if (config.receiver_change_flags) {
    flag("to_currency_change");
    flag("to_format_change");
  }
  num("pair_count");
  num("pair_mean_amount");
  num("pair_sum_ab");
  num("pair_sum_ba");
  num("pair_equilibrium");
  num("pair_secs_since_last");
  for (const auto& c : s.currency_vocab) s.columns.push_back({"currency=" + c, FeatureKind::OneHot});
  for (const auto& f : s.format_vocab) s.columns.push_back({"format=" + f, FeatureKind::OneHot});
  return s;
}

/// How extract_features treats a category missing from the frozen vocabulary.
enum class UnknownCategory {
  Zeros,  // serving: the one-hot group is all zeros
  Error,  // training: SchemaMismatch
};

inline std::string account_key(const std::string& bank, const std::string& account) { return bank + ":" + account; }
inline std::string pair_key(const std::string& from_key, const std::string& to_key) { return from_key + "->" + to_key; }

/// Point-in-time behavioural state for every account and ordered account pair.
struct FeatureState {
  std::unordered_map<std::string, AccountState> accounts;
  std::unordered_map<std::string, PairState> pairs;
};

namespace detail {

inline void push_stats(std::vector<double>& v, const RunningStats& s) {
  v.push_back(static_cast<double>(s.count));
  v.push_back(std::log1p(s.mean));
  v.push_back(std::log1p(s.std()));
  v.push_back(std::log1p(s.max));
  v.push_back(std::log1p(s.min));
}

inline double changed(const Histogram& h, const std::string& category) {
  const auto mode = modal_category(h);
  return mode && *mode != category ? 1.0 : 0.0;
}

inline void push_one_hot(std::vector<double>& v, const std::vector<std::string>& vocab, const std::string& value,
                         UnknownCategory policy, const char* what) {
  const auto it = std::lower_bound(vocab.begin(), vocab.end(), value);
  const bool known = it != vocab.end() && *it == value;
  if (!known && policy == UnknownCategory::Error) {
    throw Error(Errc::SchemaMismatch, std::string("unknown ") + what + " '" + value + "'");
  }
  const std::size_t hit = known ? static_cast<std::size_t>(it - vocab.begin()) : vocab.size();
  for (std::size_t i = 0; i < vocab.size(); ++i) v.push_back(i == hit ? 1.0 : 0.0);
}

}  // namespace detail

/// Feature vector for `tx` from its actors' prior state. Reads state only.
inline std::vector<double> extract_features(const Transaction& tx, const AccountState& from, const AccountState& to,
                                            const PairState& pair, const FeatureSchema& schema,
                                            UnknownCategory policy = UnknownCategory::Zeros) {
  const auto& cfg = schema.config;
  std::vector<double> v;
  v.reserve(schema.width());
  v.push_back(std::log1p(tx.amount_paid));
  v.push_back(std::log1p(tx.amount_received));
  detail::push_stats(v, from.as_sender);
  detail::push_stats(v, from.as_receiver);
  detail::push_stats(v, to.as_sender);
  detail::push_stats(v, to.as_receiver);

  const auto since = [&](const std::optional<std::int64_t>& last) {
    return last ? static_cast<double>(tx.timestamp - *last) : cfg.cold_start_seconds;
  };
  v.push_back(since(from.last_tx_time_as_sender));
  v.push_back(since(to.last_tx_time_as_receiver));
  v.push_back(std::log1p(from.ewma_amount_sent.value_or(0.0)));
  v.push_back(std::log1p(to.ewma_amount_received.value_or(0.0)));
  v.push_back(from.ewma_interarrival.value_or(0.0));
  v.push_back(to.ewma_interarrival.value_or(0.0));

  v.push_back(tx.from_bank == tx.to_bank ? 1.0 : 0.0);
  v.push_back(tx.from_account == tx.to_account ? 1.0 : 0.0);
  v.push_back(tx.payment_currency != tx.receiving_currency ? 1.0 : 0.0);
  v.push_back(detail::changed(from.currency_histogram, tx.payment_currency));
  v.push_back(detail::changed(from.format_histogram, tx.payment_format));
  if (cfg.receiver_change_flags) {
    v.push_back(detail::changed(to.recv_currency_histogram, tx.receiving_currency));
    v.push_back(detail::changed(to.recv_format_histogram, tx.payment_format));
  }

  v.push_back(static_cast<double>(pair.count_ab));
  v.push_back(std::log1p(pair.mean_amount_ab));
  v.push_back(std::log1p(pair.sum_amount_ab));
  v.push_back(std::log1p(pair.sum_amount_ba));
  v.push_back(pair_equilibrium(pair.sum_amount_ab, pair.sum_amount_ba));
  v.push_back(since(pair.last_pair_tx_time));

  detail::push_one_hot(v, schema.currency_vocab, tx.payment_currency, policy, "payment currency");
  detail::push_one_hot(v, schema.format_vocab, tx.payment_format, policy, "payment format");
  if (v.size() != schema.width()) {
    throw Error(Errc::SchemaMismatch, "schema width " + std::to_string(schema.width()) + " but produced " +
                                          std::to_string(v.size()) + " values");
  }
  return v;
}

inline std::vector<double> extract_features(const Transaction& tx, const FeatureState& state,
                                            const FeatureSchema& schema,
                                            UnknownCategory policy = UnknownCategory::Zeros) {
  static const AccountState empty_account;
  static const PairState empty_pair;
  const auto from_key = account_key(tx.from_bank, tx.from_account);
  const auto to_key = account_key(tx.to_bank, tx.to_account);
  const auto f = state.accounts.find(from_key);
  const auto t = state.accounts.find(to_key);
  const auto p = state.pairs.find(pair_key(from_key, to_key));
  return extract_features(tx, f == state.accounts.end() ? empty_account : f->second,
                          t == state.accounts.end() ? empty_account : t->second,
                          p == state.pairs.end() ? empty_pair : p->second, schema, policy);
}

namespace detail {

inline void bump(Histogram& h, const std::string& category, std::int64_t seq) {
  auto& c = h[category];
  ++c.count;
  c.last_seen = seq;
}

inline void observe_gap(AccountState& a, std::int64_t t, double alpha) {
  if (const auto last = a.last_activity()) {
    a.ewma_interarrival = ewma_update(a.ewma_interarrival, static_cast<double>(t - *last), alpha);
  }
}

inline void check_order(const AccountState& a, std::int64_t t, const std::string& key) {
  if (const auto last = a.last_activity(); last && t < *last) {
    throw Error(Errc::OutOfOrder, "account " + key + " saw time " + std::to_string(*last) +
                                      " before " + std::to_string(t));
  }
}

}  // namespace detail

/// Folds `tx` into the sender, receiver and pair state. Call once per transaction, after
/// extract_features, in timestamp order.
inline void update_state(const Transaction& tx, FeatureState& state, const FeatureConfig& cfg = {}) {
  const auto from_key = account_key(tx.from_bank, tx.from_account);
  const auto to_key = account_key(tx.to_bank, tx.to_account);
  const double x = tx.amount_paid;
  const double alpha = cfg.ewma_alpha;

  if (cfg.strict_order) {
    if (auto it = state.accounts.find(from_key); it != state.accounts.end()) {
      detail::check_order(it->second, tx.timestamp, from_key);
    }
    if (auto it = state.accounts.find(to_key); it != state.accounts.end()) {
      detail::check_order(it->second, tx.timestamp, to_key);
    }
  }

  {
    auto& a = state.accounts[from_key];
    detail::observe_gap(a, tx.timestamp, alpha);
    a.as_sender.update(x);
    a.ewma_amount_sent = ewma_update(a.ewma_amount_sent, x, alpha);
    a.last_tx_time_as_sender = tx.timestamp;
    detail::bump(a.currency_histogram, tx.payment_currency, a.as_sender.count);
    detail::bump(a.format_histogram, tx.payment_format, a.as_sender.count);
  }
  {
    auto& b = state.accounts[to_key];
    detail::observe_gap(b, tx.timestamp, alpha);
    b.as_receiver.update(x);
    b.ewma_amount_received = ewma_update(b.ewma_amount_received, x, alpha);
    b.last_tx_time_as_receiver = tx.timestamp;
    detail::bump(b.recv_currency_histogram, tx.receiving_currency, b.as_receiver.count);
    detail::bump(b.recv_format_histogram, tx.payment_format, b.as_receiver.count);
  }
  {
    auto& ab = state.pairs[pair_key(from_key, to_key)];
    ++ab.count_ab;
    ab.sum_amount_ab += x;
    ab.mean_amount_ab = ab.sum_amount_ab / static_cast<double>(ab.count_ab);
    ab.last_pair_tx_time = tx.timestamp;
    state.pairs[pair_key(to_key, from_key)].sum_amount_ba += x;
  }
}

struct FeaturizeOptions {
  FeatureConfig config;
  /// frozen schema (serving / held-out streams); when absent the vocabularies come from the stream
  std::optional<FeatureSchema> schema;
  UnknownCategory unknown = UnknownCategory::Zeros;
  /// when non-empty, only rows with emit[i] set are returned; state still folds every row
  std::vector<bool> emit;
};

struct FeaturizedStream {
  FeatureSchema schema;
  std::vector<LabeledRow> rows;
  FeatureState state;
};

/// Emit-then-update over a time-ordered stream. Row ids are stream positions.
inline FeaturizedStream featurize_stream(const std::vector<Transaction>& txs, const FeaturizeOptions& opts = {}) {
  for (std::size_t i = 1; i < txs.size(); ++i) {
    if (txs[i].timestamp < txs[i - 1].timestamp) {
      throw Error(Errc::OutOfOrder, "stream not sorted at row " + std::to_string(i));
    }
  }
  if (!opts.emit.empty() && opts.emit.size() != txs.size()) {
    throw Error(Errc::LengthMismatch, "emit mask length differs from stream length");
  }
  FeaturizedStream out;
  if (opts.schema) {
    out.schema = *opts.schema;
  } else {
    std::set<std::string> currencies, formats;
    for (const auto& tx : txs) {
      currencies.insert(tx.payment_currency);
      formats.insert(tx.payment_format);
    }
    out.schema = make_schema({currencies.begin(), currencies.end()}, {formats.begin(), formats.end()}, opts.config);
  }
  out.rows.reserve(txs.size());
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const auto& tx = txs[i];
    if (opts.emit.empty() || opts.emit[i]) {
      out.rows.push_back({i, tx.timestamp, tx.label, extract_features(tx, out.state, out.schema, opts.unknown)});
    }
    update_state(tx, out.state, out.schema.config);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

using nlohmann::json;

inline json to_json(const FeatureConfig& c) {
  return {{"ewma_alpha", c.ewma_alpha},
          {"cold_start_seconds", c.cold_start_seconds},
          {"receiver_change_flags", c.receiver_change_flags},
          {"strict_order", c.strict_order}};
}

inline FeatureConfig feature_config_from_json(const json& j) {
  FeatureConfig c;
  c.ewma_alpha = j.at("ewma_alpha").get<double>();
  c.cold_start_seconds = j.at("cold_start_seconds").get<double>();
  c.receiver_change_flags = j.at("receiver_change_flags").get<bool>();
  c.strict_order = j.value("strict_order", false);
  return c;
}

inline json to_json(const FeatureSchema& s) {
  json cols = json::array();
  for (std::size_t i = 0; i < s.columns.size(); ++i) {
    cols.push_back({{"order", i}, {"name", s.columns[i].name}, {"kind", to_string(s.columns[i].kind)}});
  }
  return {{"format", "fd4qc-feature-schema"},
          {"schema_version", s.version},
          {"config", to_json(s.config)},
          {"currency_vocab", s.currency_vocab},
          {"format_vocab", s.format_vocab},
          {"columns", cols}};
}

inline FeatureSchema feature_schema_from_json(const json& j) {
  try {
    if (j.at("format") != "fd4qc-feature-schema") throw Error(Errc::BadArtifact, "not a feature schema");
    FeatureSchema s = make_schema(j.at("currency_vocab").get<std::vector<std::string>>(),
                                  j.at("format_vocab").get<std::vector<std::string>>(),
                                  feature_config_from_json(j.at("config")));
    s.version = j.at("schema_version").get<int>();
    std::vector<FeatureColumn> listed;
    for (const auto& c : j.at("columns")) {
      listed.push_back({c.at("name").get<std::string>(), feature_kind_from_string(c.at("kind").get<std::string>())});
    }
    if (s.version != kFeatureSchemaVersion || listed != s.columns) {
      throw Error(Errc::SchemaMismatch, "schema columns do not match layout version " +
                                            std::to_string(kFeatureSchemaVersion));
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::BadArtifact, std::string("malformed feature schema: ") + e.what());
  }
}

namespace detail {

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> opt_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline json hist_json(const Histogram& h) {
  json j = json::object();
  for (const auto& [k, v] : h) j[k] = {v.count, v.last_seen};
  return j;
}

inline Histogram hist_from(const json& j) {
  Histogram h;
  for (const auto& [k, v] : j.items()) h[k] = {v.at(0).get<std::int64_t>(), v.at(1).get<std::int64_t>()};
  return h;
}

inline json stats_json(const RunningStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"m2", s.m2}, {"max", s.max}, {"min", s.min}};
}

inline RunningStats stats_from(const json& j) {
  RunningStats s;
  s.count = j.at("count").get<std::int64_t>();
  s.mean = j.at("mean").get<double>();
  s.m2 = j.at("m2").get<double>();
  s.max = j.at("max").get<double>();
  s.min = j.at("min").get<double>();
  return s;
}

}  // namespace detail

inline json to_json(const AccountState& a) {
  return {{"as_sender", detail::stats_json(a.as_sender)},
          {"as_receiver", detail::stats_json(a.as_receiver)},
          {"last_tx_time_as_sender", detail::opt(a.last_tx_time_as_sender)},
          {"last_tx_time_as_receiver", detail::opt(a.last_tx_time_as_receiver)},
          {"ewma_amount_sent", detail::opt(a.ewma_amount_sent)},
          {"ewma_amount_received", detail::opt(a.ewma_amount_received)},
          {"ewma_interarrival", detail::opt(a.ewma_interarrival)},
          {"currency_histogram", detail::hist_json(a.currency_histogram)},
          {"format_histogram", detail::hist_json(a.format_histogram)},
          {"recv_currency_histogram", detail::hist_json(a.recv_currency_histogram)},
          {"recv_format_histogram", detail::hist_json(a.recv_format_histogram)}};
}

/// Missing keys fall back to the cold-start state so callers may send partial snapshots.
inline AccountState account_state_from_json(const json& j) {
  AccountState a;
  if (j.contains("as_sender")) a.as_sender = detail::stats_from(j.at("as_sender"));
  if (j.contains("as_receiver")) a.as_receiver = detail::stats_from(j.at("as_receiver"));
  a.last_tx_time_as_sender = detail::opt_from<std::int64_t>(j, "last_tx_time_as_sender");
  a.last_tx_time_as_receiver = detail::opt_from<std::int64_t>(j, "last_tx_time_as_receiver");
  a.ewma_amount_sent = detail::opt_from<double>(j, "ewma_amount_sent");
  a.ewma_amount_received = detail::opt_from<double>(j, "ewma_amount_received");
  a.ewma_interarrival = detail::opt_from<double>(j, "ewma_interarrival");
  if (j.contains("currency_histogram")) a.currency_histogram = detail::hist_from(j.at("currency_histogram"));
  if (j.contains("format_histogram")) a.format_histogram = detail::hist_from(j.at("format_histogram"));
  if (j.contains("recv_currency_histogram")) {
    a.recv_currency_histogram = detail::hist_from(j.at("recv_currency_histogram"));
  }
  if (j.contains("recv_format_histogram")) a.recv_format_histogram = detail::hist_from(j.at("recv_format_histogram"));
  return a;
}

inline json to_json(const PairState& p) {
  return {{"count_ab", p.count_ab},
          {"sum_amount_ab", p.sum_amount_ab},
          {"sum_amount_ba", p.sum_amount_ba},
          {"last_pair_tx_time", detail::opt(p.last_pair_tx_time)},
          {"mean_amount_ab", p.mean_amount_ab}};
}

inline PairState pair_state_from_json(const json& j) {
  PairState p;
  p.count_ab = j.value("count_ab", std::int64_t{0});
  p.sum_amount_ab = j.value("sum_amount_ab", 0.0);
  p.sum_amount_ba = j.value("sum_amount_ba", 0.0);
  p.last_pair_tx_time = detail::opt_from<std::int64_t>(j, "last_pair_tx_time");
  p.mean_amount_ab = j.value("mean_amount_ab", 0.0);
  return p;
}

inline json to_json(const Transaction& tx) {
  return {{"timestamp", tx.timestamp},          {"from_bank", tx.from_bank},
          {"from_account", tx.from_account},    {"to_bank", tx.to_bank},
          {"to_account", tx.to_account},        {"amount_paid", tx.amount_paid},
          {"payment_currency", tx.payment_currency}, {"amount_received", tx.amount_received},
          {"receiving_currency", tx.receiving_currency}, {"payment_format", tx.payment_format},
          {"label", tx.label}};
}

/// Label is optional here: serving requests carry unlabeled transactions.
inline Transaction transaction_from_json(const json& j) {
  Transaction tx;
  tx.timestamp = j.at("timestamp").get<std::int64_t>();
  tx.from_bank = j.at("from_bank").get<std::string>();
  tx.from_account = j.at("from_account").get<std::string>();
  tx.to_bank = j.at("to_bank").get<std::string>();
  tx.to_account = j.at("to_account").get<std::string>();
  tx.amount_paid = j.at("amount_paid").get<double>();
  tx.payment_currency = j.at("payment_currency").get<std::string>();
  tx.amount_received = j.at("amount_received").get<double>();
  tx.receiving_currency = j.at("receiving_currency").get<std::string>();
  tx.payment_format = j.at("payment_format").get<std::string>();
  tx.label = j.value("label", 0);
  if (!(tx.amount_paid > 0.0) || !(tx.amount_received > 0.0)) {
    throw Error(Errc::BadNumber, "amounts must be positive");
  }
  return tx;
}

inline void save_schema(const std::string& path, const FeatureSchema& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  out << to_json(s).dump(2) << '\n';
}

inline FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::BadArtifact, "'" + path + "': " + e.what());
  }
  return feature_schema_from_json(j);
}

/// Feature matrix CSV: schema column names, then `timestamp` and `label`.
inline void write_feature_csv(const std::string& path, const FeatureSchema& s, const std::vector<LabeledRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  for (const auto& c : s.columns) out << c.name << ',';
  out << "timestamp,label\n";
  for (const auto& r : rows) {
    for (double v : r.features) out << format_double(v) << ',';
    out << r.timestamp << ',' << r.label << '\n';
  }
}

struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<LabeledRow> rows;
};

inline FeatureMatrix read_feature_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  FeatureMatrix m;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::MalformedRow, "'" + path + "' has no header");
  for (auto f : detail::split_fields(line)) m.names.emplace_back(f);
  if (m.names.size() < 2 || m.names[m.names.size() - 2] != "timestamp" || m.names.back() != "label") {
    throw Error(Errc::MalformedRow, "feature header must end with timestamp,label");
  }
  m.names.resize(m.names.size() - 2);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != m.names.size() + 2) {
      throw RowError(Errc::MalformedRow, "wrong field count", line_no);
    }
    LabeledRow r;
    r.id = m.rows.size();
    for (std::size_t i = 0; i < m.names.size(); ++i) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (ec != std::errc{} || p != fields[i].data() + fields[i].size()) {
        throw RowError(Errc::BadNumber, "column " + m.names[i], line_no);
      }
      r.features.push_back(v);
    }
    auto ts = fields[m.names.size()];
    auto [p, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), r.timestamp);
    if (ec != std::errc{}) throw RowError(Errc::BadTimestamp, std::string(ts), line_no);
    const auto lab = fields.back();
    if (lab != "0" && lab != "1") throw RowError(Errc::BadLabel, std::string(lab), line_no);
    r.label = lab == "1";
    m.rows.push_back(std::move(r));
  }
  return m;
}

/// One JSON object per line: {"kind": "account"|"pair", "key": ..., "state": {...}}, keys sorted.
inline void write_state_snapshot(const std::string& path, const FeatureState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  std::map<std::string, const AccountState*> accounts;
  for (const auto& [k, v] : state.accounts) accounts[k] = &v;
  std::map<std::string, const PairState*> pairs;
  for (const auto& [k, v] : state.pairs) pairs[k] = &v;
  for (const auto& [k, v] : accounts) out << json{{"kind", "account"}, {"key", k}, {"state", to_json(*v)}}.dump() << '\n';
  for (const auto& [k, v] : pairs) out << json{{"kind", "pair"}, {"key", k}, {"state", to_json(*v)}}.dump() << '\n';
}

inline FeatureState read_state_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open '" + path + "'");
  FeatureState state;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    const auto key = j.at("key").get<std::string>();
    if (j.at("kind") == "account") {
      state.accounts[key] = account_state_from_json(j.at("state"));
    } else {
      state.pairs[key] = pair_state_from_json(j.at("state"));
    }
  }
  return state;
}

}  // namespace fd4qc
