#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "fd4qc/error.hpp"
#include "fd4qc/rng.hpp"

namespace fd4qc {

struct Transaction {
  std::int64_t timestamp = 0;  // seconds since epoch
  std::string from_bank;
  std::string from_account;
  std::string to_bank;
  std::string to_account;
  double amount_paid = 0.0;
  std::string payment_currency;
  double amount_received = 0.0;
  std::string receiving_currency;
  std::string payment_format;
  int label = 0;

  bool operator==(const Transaction&) const = default;
};

/// Position of each Transaction field within a CSV row.
struct ColumnLayout {
  enum Field : int {
    Timestamp, FromBank, FromAccount, ToBank, ToAccount, AmountReceived,
    ReceivingCurrency, AmountPaid, PaymentCurrency, PaymentFormat, Label, FieldCount
  };

  /// column index of each Field, indexed by Field
  std::array<int, FieldCount> position{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// total columns per row; may exceed FieldCount when extra columns are ignored
  int columns = FieldCount;
  std::string timestamp_format = "%Y/%m/%d %H:%M";

  /// Public IBM AML transaction file layout.
  static ColumnLayout ibm_aml() { return {}; }
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i < line.size() && line[i] == '"') quoted = !quoted;
    if (i == line.size() || (line[i] == ',' && !quoted)) {
      std::string_view f = line.substr(start, i - start);
      if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
      out.push_back(f);
      start = i + 1;
    }
  }
  return out;
}

inline bool read_int(std::string_view s, std::size_t& pos, int width, int& out) {
  if (pos + width > s.size()) return false;
  int v = 0;
  for (int i = 0; i < width; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += width;
  out = v;
  return true;
}

inline std::string pad(int v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace detail

/// Parses `text` against a strftime-like format supporting %Y %m %d %H %M %S.
/// The wall-clock value is treated as naive (UTC) and returned as epoch seconds.
inline std::int64_t parse_timestamp(std::string_view text, std::string_view format) {
  int year = 1970, month = 1, day = 1, hour = 0, minute = 0, second = 0;
  std::size_t pos = 0;
  auto fail = [&] { return Error(Errc::BadTimestamp, "cannot parse '" + std::string(text) + "'"); };
  for (std::size_t i = 0; i < format.size(); ++i) {
    if (format[i] == '%' && i + 1 < format.size()) {
      bool ok = false;
      switch (format[++i]) {
        case 'Y': ok = detail::read_int(text, pos, 4, year); break;
        case 'm': ok = detail::read_int(text, pos, 2, month); break;
        case 'd': ok = detail::read_int(text, pos, 2, day); break;
        case 'H': ok = detail::read_int(text, pos, 2, hour); break;
        case 'M': ok = detail::read_int(text, pos, 2, minute); break;
        case 'S': ok = detail::read_int(text, pos, 2, second); break;
        default: ok = false;
      }
      if (!ok) throw fail();
    } else {
      if (pos >= text.size() || text[pos] != format[i]) throw fail();
      ++pos;
    }
  }
  if (pos != text.size()) throw fail();
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) throw fail();
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + hour * 3600 + minute * 60 + second;
}

inline std::string format_timestamp(std::int64_t epoch, std::string_view format) {
  using namespace std::chrono;
  std::int64_t days = epoch / 86400;
  std::int64_t rem = epoch % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  std::string out;
  for (std::size_t i = 0; i < format.size(); ++i) {
    if (format[i] == '%' && i + 1 < format.size()) {
      switch (format[++i]) {
        case 'Y': out += detail::pad(static_cast<int>(ymd.year()), 4); break;
        case 'm': out += detail::pad(static_cast<unsigned>(ymd.month()), 2); break;
        case 'd': out += detail::pad(static_cast<unsigned>(ymd.day()), 2); break;
        case 'H': out += detail::pad(static_cast<int>(rem / 3600), 2); break;
        case 'M': out += detail::pad(static_cast<int>(rem / 60 % 60), 2); break;
        case 'S': out += detail::pad(static_cast<int>(rem % 60), 2); break;
        default: out += format[i];
      }
    } else {
      out += format[i];
    }
  }
  return out;
}

inline double parse_amount(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(Errc::BadNumber, "cannot parse amount '" + std::string(s) + "'");
  }
  if (!(v > 0.0)) throw Error(Errc::BadNumber, "amount must be positive, got '" + std::string(s) + "'");
  return v;
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline Transaction parse_row(std::string_view raw_line, const ColumnLayout& layout = {}) {
  if (!raw_line.empty() && raw_line.back() == '\r') raw_line.remove_suffix(1);
  const auto fields = detail::split_fields(raw_line);
  if (static_cast<int>(fields.size()) != layout.columns) {
    throw Error(Errc::MalformedRow, "expected " + std::to_string(layout.columns) + " fields, got " +
                                        std::to_string(fields.size()));
  }
  auto field = [&](ColumnLayout::Field f) { return fields[layout.position[f]]; };
  Transaction tx;
  tx.timestamp = parse_timestamp(field(ColumnLayout::Timestamp), layout.timestamp_format);
  tx.from_bank = field(ColumnLayout::FromBank);
  tx.from_account = field(ColumnLayout::FromAccount);
  tx.to_bank = field(ColumnLayout::ToBank);
  tx.to_account = field(ColumnLayout::ToAccount);
  tx.amount_received = parse_amount(field(ColumnLayout::AmountReceived));
  tx.receiving_currency = field(ColumnLayout::ReceivingCurrency);
  tx.amount_paid = parse_amount(field(ColumnLayout::AmountPaid));
  tx.payment_currency = field(ColumnLayout::PaymentCurrency);
  tx.payment_format = field(ColumnLayout::PaymentFormat);
  const auto label = field(ColumnLayout::Label);
  if (label == "0") {
    tx.label = 0;
  } else if (label == "1") {
    tx.label = 1;
  } else {
    throw Error(Errc::BadLabel, "label must be 0 or 1, got '" + std::string(label) + "'");
  }
  return tx;
}

inline std::string serialize_row(const Transaction& tx, const ColumnLayout& layout = {}) {
  std::vector<std::string> cols(layout.columns);
  cols[layout.position[ColumnLayout::Timestamp]] = format_timestamp(tx.timestamp, layout.timestamp_format);
  cols[layout.position[ColumnLayout::FromBank]] = tx.from_bank;
  cols[layout.position[ColumnLayout::FromAccount]] = tx.from_account;
  cols[layout.position[ColumnLayout::ToBank]] = tx.to_bank;
  cols[layout.position[ColumnLayout::ToAccount]] = tx.to_account;
  cols[layout.position[ColumnLayout::AmountReceived]] = format_double(tx.amount_received);
  cols[layout.position[ColumnLayout::ReceivingCurrency]] = tx.receiving_currency;
  cols[layout.position[ColumnLayout::AmountPaid]] = format_double(tx.amount_paid);
  cols[layout.position[ColumnLayout::PaymentCurrency]] = tx.payment_currency;
  cols[layout.position[ColumnLayout::PaymentFormat]] = tx.payment_format;
  cols[layout.position[ColumnLayout::Label]] = tx.label ? "1" : "0";
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

inline std::string ibm_aml_header() {
  return "Timestamp,From Bank,Account,To Bank,Account,Amount Received,Receiving Currency,"
         "Amount Paid,Payment Currency,Payment Format,Is Laundering";
}

struct ReadOptions {
  ColumnLayout layout;
  bool has_header = true;
  /// strict: the first bad row aborts the read; otherwise bad rows are skipped and recorded
  bool strict = true;
};

struct SkippedRow {
  std::size_t line;
  std::string message;
};

struct ReadResult {
  std::vector<Transaction> transactions;
  std::vector<SkippedRow> skipped;
};

/// Reads plain or gzip-compressed CSV (zlib reads uncompressed input transparently).
/// Rows are returned in file order; see sort_by_time.
inline ReadResult read_transactions(const std::string& path, const ReadOptions& opts = {}) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (!file) throw Error(Errc::Io, "cannot open '" + path + "'");
  ReadResult result;
  std::string line;
  std::array<char, 1 << 16> buf{};
  std::size_t line_no = 0;
  auto consume = [&](const std::string& l) {
    ++line_no;
    if (line_no == 1 && opts.has_header) return;
    if (l.empty() || l == "\r") return;
    try {
      result.transactions.push_back(parse_row(l, opts.layout));
    } catch (const Error& e) {
      if (opts.strict) {
        gzclose(file);
        throw RowError(e.code(), e.detail(), line_no);
      }
      result.skipped.push_back({line_no, e.what()});
    }
  };
  while (gzgets(file, buf.data(), static_cast<int>(buf.size())) != nullptr) {
    line += buf.data();
    if (!line.empty() && line.back() == '\n') {
      line.pop_back();
      consume(line);
      line.clear();
    }
  }
  if (!line.empty()) consume(line);
  gzclose(file);
  return result;
}

inline void write_transactions(const std::string& path, const std::vector<Transaction>& txs,
                               const ColumnLayout& layout = {}, bool header = true) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
  if (header) out << ibm_aml_header() << '\n';
  for (const auto& tx : txs) out << serialize_row(tx, layout) << '\n';
}

/// Stable: rows sharing a timestamp keep their input order.
inline void sort_by_time(std::vector<Transaction>& txs) {
  std::stable_sort(txs.begin(), txs.end(),
                   [](const Transaction& a, const Transaction& b) { return a.timestamp < b.timestamp; });
}

/// One featurized row with its provenance; `id` is the position in the time-ordered stream.
struct LabeledRow {
  std::size_t id = 0;
  std::int64_t timestamp = 0;
  int label = 0;
  std::vector<double> features;

  bool operator==(const LabeledRow&) const = default;
};

struct DatasetSplit {
  std::vector<LabeledRow> train;
  std::vector<LabeledRow> test;
  std::uint64_t seed = 0;
  int ratio_negative_per_positive = 9;
};

namespace detail {

inline void sort_rows_by_time(std::vector<LabeledRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const LabeledRow& a, const LabeledRow& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.id < b.id;
  });
}

}  // namespace detail

/// Keeps every positive and exactly ratio x positives negatives (all negatives when fewer exist),
/// sampled uniformly without replacement. Output is time-ordered.
inline std::vector<LabeledRow> undersample(const std::vector<LabeledRow>& rows, int ratio, std::uint64_t seed) {
  if (ratio < 1) throw Error(Errc::BadConfig, "ratio must be >= 1");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < rows.size(); ++i) (rows[i].label ? pos : neg).push_back(i);
  if (pos.empty()) throw Error(Errc::NoPositives, "undersampling needs at least one positive row");
  const std::size_t want = std::min(neg.size(), static_cast<std::size_t>(ratio) * pos.size());
  Rng rng(mix_seed(seed, 0x0055));
  std::vector<LabeledRow> out;
  out.reserve(pos.size() + want);
  for (auto i : pos) out.push_back(rows[i]);
  for (auto k : sample_without_replacement(neg.size(), want, rng)) out.push_back(rows[neg[k]]);
  detail::sort_rows_by_time(out);
  return out;
}

/// Per-class holdout: each class contributes round(n_class x test_fraction) rows to test,
/// clamped so both partitions keep at least one row of each class.
inline DatasetSplit stratified_split(const std::vector<LabeledRow>& rows, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::BadConfig, "test_fraction must lie in (0, 1)");
  }
  DatasetSplit split;
  split.seed = seed;
  Rng rng(mix_seed(seed, 0x5917));
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].label == cls) members.push_back(i);
    }
    if (members.size() < 2) {
      throw Error(Errc::DegenerateClass, "class " + std::to_string(cls) + " has fewer than 2 rows");
    }
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    shuffle(members, rng);
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < n_test ? split.test : split.train).push_back(rows[members[k]]);
    }
  }
  detail::sort_rows_by_time(split.train);
  detail::sort_rows_by_time(split.test);
  return split;
}

}  // namespace fd4qc
