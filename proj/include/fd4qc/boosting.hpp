#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "fd4qc/matrix.hpp"
#include "fd4qc/tree.hpp"

namespace fd4qc {

struct GbtConfig {
  int rounds = 100;
  int depth = 4;
  double shrinkage = 0.1;
  double l2_leaf = 1.0;
  double min_child_weight = 1.0;
};

/// Newton-boosted score trees on the logistic loss.
struct BoostedEnsemble {
  double base_score = 0.0;  // log-odds
  std::vector<Tree> trees;
  double shrinkage = 0.1;
  double l2_leaf = 1.0;

  double margin(std::span<const double> x) const {
    double m = 0.0;
    for (const auto& t : trees) m += t.predict(x);
    return base_score + shrinkage * m;
  }
  double predict(std::span<const double> x) const { return sigmoid(margin(x)); }

  bool operator==(const BoostedEnsemble&) const = default;
};

inline double log_loss(const std::vector<double>& margins, const std::vector<int>& y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double z = margins[i];
    loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) - y[i] * z;
  }
  return loss / static_cast<double>(y.size());
}

/// Per round: g = p - y, h = p(1 - p); trees maximize the second-order gain and leaves
/// take -sum(g) / (sum(h) + l2_leaf). `loss_history` receives the training log-loss
/// before the first round and after each round.
inline BoostedEnsemble gbt_fit(const Matrix& x, const std::vector<int>& y, const GbtConfig& cfg = {},
                               std::vector<double>* loss_history = nullptr) {
  check_fit_inputs(x, y);
  if (!has_both_classes(y)) throw Error(Errc::SingleClass, "boosting needs both classes");
  BoostedEnsemble model;
  model.shrinkage = cfg.shrinkage;
  model.l2_leaf = cfg.l2_leaf;
  double pos = 0.0;
  for (int v : y) pos += v;
  const double rate = pos / static_cast<double>(y.size());
  model.base_score = std::log(rate / (1.0 - rate));

  const std::size_t n = x.rows();
  std::vector<double> margin(n, model.base_score);
  std::vector<SplitStats> stats(n);
  if (loss_history) loss_history->push_back(log_loss(margin, y));
  for (int round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      stats[i] = {1.0, p - y[i], p * (1.0 - p)};
    }
    detail::TreeGrower<NewtonCriterion> grower(x, stats, NewtonCriterion{cfg.l2_leaf, cfg.min_child_weight},
                                               GrowConfig{cfg.depth, 0}, nullptr);
    Tree t = grower.grow();
    for (std::size_t i = 0; i < n; ++i) margin[i] += cfg.shrinkage * t.predict(x.row(i));
    model.trees.push_back(std::move(t));
    if (loss_history) loss_history->push_back(log_loss(margin, y));
  }
  return model;
}

}  // namespace fd4qc
