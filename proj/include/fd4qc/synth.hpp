#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "fd4qc/ingest.hpp"
#include "fd4qc/rng.hpp"

namespace fd4qc {

/**
 * Synthetic transaction stream in the IBM AML column layout, for running the
 * pipeline without the real download.
 *
 * Background traffic: accounts pay a few regular counterparties in their home
 * currency and preferred payment format, with lognormal amounts around a
 * per-account scale; some accounts move money between their own holdings.
 * Laundering traffic is injected as fan-out, fan-in, cycle and scatter-gather
 * patterns over a small pool of mule accounts, compressed in time. Mules also
 * carry ordinary traffic, so labels are not a function of the account alone.
 */
struct SynthConfig {
  std::size_t transactions = 200000;
  std::size_t accounts = 20000;
  int banks = 200;
  double laundering_fraction = 0.012;
  double mule_fraction = 0.03;
  int days = 16;
  std::uint64_t seed = 2022;
};

namespace detail::synth {

struct Currency {
  const char* name;
  double usd;  // value of one unit in dollars
};

inline constexpr std::array<Currency, 13> kCurrencies{{{"US Dollar", 1.0},
                                                       {"Euro", 1.08},
                                                       {"UK Pound", 1.27},
                                                       {"Yuan", 0.14},
                                                       {"Yen", 0.0068},
                                                       {"Rupee", 0.012},
                                                       {"Swiss Franc", 1.12},
                                                       {"Australian Dollar", 0.66},
                                                       {"Canadian Dollar", 0.74},
                                                       {"Mexican Peso", 0.058},
                                                       {"Ruble", 0.011},
                                                       {"Brazil Real", 0.2},
                                                       {"Saudi Riyal", 0.27}}};
inline constexpr std::array<double, 13> kCurrencyWeight{60, 12, 5, 5, 4, 4, 2, 2, 2, 1, 1, 1, 1};

inline constexpr std::array<const char*, 6> kFormats{"Cheque", "Credit Card", "ACH", "Wire", "Cash", "Bitcoin"};
inline constexpr std::array<double, 6> kFormatWeight{30, 30, 15, 10, 12, 3};

struct Account {
  std::string bank;
  std::string id;
  int currency;
  int format;
  double log_scale;
  std::vector<std::size_t> payees;
};

template <std::size_t N>
int weighted(const std::array<double, N>& w, Rng& rng) {
  double total = 0.0;
  for (double v : w) total += v;
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < N; ++i) {
    if ((u -= w[i]) < 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(N - 1);
}

inline double round_cents(double v) { return std::max(0.01, std::round(v * 100.0) / 100.0); }

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    horizon_ = static_cast<std::int64_t>(cfg.days) * 86400;
    accounts_.reserve(cfg.accounts);
    for (std::size_t i = 0; i < cfg.accounts; ++i) {
      Account a;
      a.bank = std::to_string(1 + uniform_index(rng_, static_cast<std::size_t>(cfg.banks)));
      char buf[16];
      std::snprintf(buf, sizeof buf, "%09llX", static_cast<unsigned long long>(0x800000000ULL + i * 7919ULL));
      a.id = buf;
      a.currency = weighted(kCurrencyWeight, rng_);
      a.format = weighted(kFormatWeight, rng_);
      a.log_scale = 4.0 + 4.0 * uniform01(rng_);
      accounts_.push_back(std::move(a));
    }
    for (auto& a : accounts_) {
      const std::size_t k = 1 + uniform_index(rng_, 5);
      for (std::size_t j = 0; j < k; ++j) a.payees.push_back(uniform_index(rng_, accounts_.size()));
    }
    const auto n_mules = std::max<std::size_t>(8, static_cast<std::size_t>(cfg.mule_fraction * cfg.accounts));
    mules_ = sample_without_replacement(accounts_.size(), std::min(n_mules, accounts_.size()), rng_);
  }

  std::vector<Transaction> run() {
    const auto target_illicit = static_cast<std::size_t>(cfg_.laundering_fraction * cfg_.transactions);
    while (illicit_ < target_illicit) inject_pattern();
    while (out_.size() < cfg_.transactions) legit();
    sort_by_time(out_);
    return std::move(out_);
  }

 private:
  std::int64_t random_time() { return 60 * static_cast<std::int64_t>(uniform_index(rng_, horizon_ / 60)); }

  double lognormal(double mu, double sigma) {
    std::normal_distribution<double> n(mu, sigma);
    return std::exp(n(rng_));
  }

  void emit(std::size_t from, std::size_t to, double usd, int format, std::int64_t t, int label, bool convert) {
    const Account& a = accounts_[from];
    const Account& b = accounts_[to];
    Transaction tx;
    tx.timestamp = kEpoch + std::clamp<std::int64_t>(t, 0, horizon_ - 60) / 60 * 60;
    tx.from_bank = a.bank;
    tx.from_account = a.id;
    tx.to_bank = b.bank;
    tx.to_account = b.id;
    const int pay_cur = a.currency;
    const int recv_cur = convert ? b.currency : a.currency;
    tx.payment_currency = kCurrencies[pay_cur].name;
    tx.receiving_currency = kCurrencies[recv_cur].name;
    tx.amount_paid = round_cents(usd / kCurrencies[pay_cur].usd);
    tx.amount_received = round_cents(usd / kCurrencies[recv_cur].usd);
    tx.payment_format = kFormats[format];
    tx.label = label;
    out_.push_back(std::move(tx));
    illicit_ += label;
  }

  void legit() {
    const std::size_t from = uniform_index(rng_, accounts_.size());
    const Account& a = accounts_[from];
    const double u = uniform01(rng_);
    std::size_t to;
    int format = a.format;
    if (u < 0.08) {
      to = from;  // moving money between own holdings
    } else if (u < 0.83) {
      to = a.payees[uniform_index(rng_, a.payees.size())];
    } else {
      to = uniform_index(rng_, accounts_.size());
    }
    if (uniform01(rng_) < 0.15) format = weighted(kFormatWeight, rng_);
    const double usd = lognormal(a.log_scale, 1.0);
    emit(from, to, usd, format, random_time(), 0, uniform01(rng_) < 0.05);
  }

  std::vector<std::size_t> distinct_mules(std::size_t k) {
    std::vector<std::size_t> picks;
    for (auto i : sample_without_replacement(mules_.size(), std::min(k, mules_.size()), rng_)) {
      picks.push_back(mules_[i]);
    }
    return picks;
  }

  /// Small time step inside a pattern: minutes to a few hours.
  std::int64_t hop() { return 60 * static_cast<std::int64_t>(5 + uniform_index(rng_, 240)); }

  int laundering_format() { return uniform01(rng_) < 0.6 ? 2 /* ACH */ : weighted(kFormatWeight, rng_); }

  void inject_pattern() {
    const double total = lognormal(9.0, 0.8);
    std::int64_t t = random_time();
    const int format = laundering_format();
    const bool convert = uniform01(rng_) < 0.3;
    switch (uniform_index(rng_, 4)) {
      case 0: {  // fan-out
        auto ids = distinct_mules(5 + uniform_index(rng_, 8));
        for (std::size_t i = 1; i < ids.size(); ++i) {
          emit(ids[0], ids[i], total / static_cast<double>(ids.size() - 1) * (0.9 + 0.2 * uniform01(rng_)), format,
               t += hop(), 1, convert);
        }
        break;
      }
      case 1: {  // fan-in
        auto ids = distinct_mules(5 + uniform_index(rng_, 8));
        for (std::size_t i = 1; i < ids.size(); ++i) {
          emit(ids[i], ids[0], total / static_cast<double>(ids.size() - 1) * (0.9 + 0.2 * uniform01(rng_)), format,
               t += hop(), 1, convert);
        }
        break;
      }
      case 2: {  // cycle
        auto ids = distinct_mules(3 + uniform_index(rng_, 5));
        double amount = total;
        for (std::size_t i = 0; i < ids.size(); ++i) {
          emit(ids[i], ids[(i + 1) % ids.size()], amount, format, t += hop(), 1, convert);
          amount *= 0.95 + 0.04 * uniform01(rng_);
        }
        break;
      }
      default: {  // scatter-gather
        auto ids = distinct_mules(4 + uniform_index(rng_, 6));
        const std::size_t src = ids[0], dst = ids[1];
        const double part = total / static_cast<double>(ids.size() - 2);
        for (std::size_t i = 2; i < ids.size(); ++i) emit(src, ids[i], part, format, t + hop(), 1, convert);
        t += 6 * 3600;
        for (std::size_t i = 2; i < ids.size(); ++i) emit(ids[i], dst, part * 0.97, format, t + hop(), 1, convert);
        break;
      }
    }
  }

  static constexpr std::int64_t kEpoch = 1661990400;  // 2022-09-01 00:00 UTC

  SynthConfig cfg_;
  Rng rng_;
  std::int64_t horizon_ = 0;
  std::vector<Account> accounts_;
  std::vector<std::size_t> mules_;
  std::vector<Transaction> out_;
  std::size_t illicit_ = 0;
};

}  // namespace detail::synth

/// Time-ordered synthetic stream; deterministic per seed.
inline std::vector<Transaction> synthesize_transactions(const SynthConfig& cfg = {}) {
  if (cfg.accounts < 16 || cfg.banks < 1 || cfg.days < 1) throw Error(Errc::BadConfig, "synthetic config too small");
  return detail::synth::Generator(cfg).run();
}

}  // namespace fd4qc
