#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "fd4qc/matrix.hpp"
#include "fd4qc/rng.hpp"

namespace fd4qc {

/// Flat-arena tree node. Leaves have feature == -1. Rows with x[feature] < threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// leaf probability (classification trees) or leaf score (boosting trees)
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const {
    int i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = x[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[i].value;
  }

  int depth() const { return depth_from(0); }

  bool operator==(const Tree&) const = default;

 private:
  int depth_from(int i) const {
    if (nodes[i].is_leaf()) return 0;
    return 1 + std::max(depth_from(nodes[i].left), depth_from(nodes[i].right));
  }
};

/// Additive node statistics: `n` is the row weight, `a`/`b` are criterion-specific sums.
struct SplitStats {
  double n = 0.0;
  double a = 0.0;
  double b = 0.0;

  SplitStats& operator+=(const SplitStats& o) {
    n += o.n;
    a += o.a;
    b += o.b;
    return *this;
  }
  SplitStats operator-(const SplitStats& o) const { return {n - o.n, a - o.a, b - o.b}; }
};

/// Gini impurity; a = weighted positive count.
struct GiniCriterion {
  double min_leaf = 1.0;

  static double weighted_impurity(const SplitStats& s) {
    if (s.n <= 0.0) return 0.0;
    return 2.0 * s.a * (s.n - s.a) / s.n;  // n * (1 - p^2 - (1-p)^2)
  }
  double gain(const SplitStats& parent, const SplitStats& left, const SplitStats& right) const {
    return weighted_impurity(parent) - weighted_impurity(left) - weighted_impurity(right);
  }
  double leaf(const SplitStats& s) const { return s.n > 0.0 ? s.a / s.n : 0.0; }
  bool valid_child(const SplitStats& s) const { return s.n >= min_leaf; }
  bool pure(const SplitStats& s) const { return s.a <= 0.0 || s.a >= s.n; }
  // Zero-gain splits are allowed on impure nodes (XOR needs one at the root).
  bool accept(double gain) const { return gain >= 0.0; }
};

/// Second-order boosting objective; a = sum of gradients, b = sum of hessians.
struct NewtonCriterion {
  double l2_leaf = 1.0;
  double min_child_weight = 1.0;

  double score(const SplitStats& s) const { return s.a * s.a / (s.b + l2_leaf); }
  double gain(const SplitStats& parent, const SplitStats& left, const SplitStats& right) const {
    return 0.5 * (score(left) + score(right) - score(parent));
  }
  double leaf(const SplitStats& s) const { return -s.a / (s.b + l2_leaf); }
  bool valid_child(const SplitStats& s) const { return s.n >= 1.0 && s.b >= min_child_weight; }
  bool pure(const SplitStats&) const { return false; }
  bool accept(double gain) const { return gain > 0.0; }
};

struct GrowConfig {
  int max_depth = 12;
  /// 0 means every feature is a candidate at every split
  std::size_t features_per_split = 0;
};

namespace detail {

/**
 * Greedy top-down growth over pre-sorted feature columns.
 *
 * Every feature keeps its active rows sorted by value; a node owns the same
 * [begin, end) range in every column and splitting stable-partitions each
 * column's range. Candidate thresholds are midpoints between consecutive
 * distinct values. Features are scanned in ascending index order and
 * thresholds ascending, and only a strictly better gain replaces the
 * incumbent, so ties resolve to the lowest feature then lowest threshold.
 */
template <class Criterion>
class TreeGrower {
 public:
  TreeGrower(const Matrix& x, std::vector<SplitStats> row_stats, const Criterion& crit, const GrowConfig& cfg,
             Rng* rng)
      : x_(x), stats_(std::move(row_stats)), crit_(crit), cfg_(cfg), rng_(rng) {
    std::vector<std::size_t> active;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      if (stats_[r].n > 0.0) active.push_back(r);
    }
    sorted_.assign(x.cols(), active);
    for (std::size_t f = 0; f < x.cols(); ++f) {
      std::stable_sort(sorted_[f].begin(), sorted_[f].end(),
                       [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    }
    goes_left_.assign(x.rows(), 0);
    scratch_.reserve(active.size());
    n_active_ = active.size();
  }

  Tree grow() {
    Tree t;
    if (n_active_ == 0) {
      t.nodes.push_back({});
      return t;
    }
    if (x_.cols() == 0) {
      SplitStats total;
      for (const auto& s : stats_) total += s;
      t.nodes.push_back({-1, 0.0, -1, -1, crit_.leaf(total)});
      return t;
    }
    build(t, 0, n_active_, 0);
    return t;
  }

 private:
  struct Best {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = x_.cols();
    const std::size_t k = cfg_.features_per_split == 0 ? d : std::min(cfg_.features_per_split, d);
    if (k == d || rng_ == nullptr) {
      std::vector<std::size_t> all(d);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    auto pick = sample_without_replacement(d, k, *rng_);
    std::sort(pick.begin(), pick.end());
    return pick;
  }

  int build(Tree& t, std::size_t begin, std::size_t end, int depth) {
    SplitStats total;
    for (std::size_t i = begin; i < end; ++i) total += stats_[sorted_[0][i]];
    const int id = static_cast<int>(t.nodes.size());
    t.nodes.push_back({-1, 0.0, -1, -1, crit_.leaf(total)});
    if (depth >= cfg_.max_depth || crit_.pure(total) || end - begin < 2) return id;

    std::optional<Best> best;
    for (std::size_t f : candidate_features()) {
      const auto& col = sorted_[f];
      SplitStats left;
      for (std::size_t i = begin; i + 1 < end; ++i) {
        left += stats_[col[i]];
        const double lo = x_(col[i], f);
        const double hi = x_(col[i + 1], f);
        if (!(hi > lo)) continue;
        const SplitStats right = total - left;
        if (!crit_.valid_child(left) || !crit_.valid_child(right)) continue;
        const double g = crit_.gain(total, left, right);
        if (!crit_.accept(g)) continue;
        // gains equal up to rounding count as ties
        if (!best || g > best->gain + 1e-12 * std::max(1.0, std::abs(best->gain))) {
          double thr = lo + (hi - lo) / 2.0;
          if (!(thr > lo)) thr = hi;
          best = Best{static_cast<int>(f), thr, g};
        }
      }
    }
    if (!best) return id;

    const auto f = static_cast<std::size_t>(best->feature);
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t r = sorted_[f][i];
      goes_left_[r] = x_(r, f) < best->threshold;
      n_left += goes_left_[r];
    }
    for (auto& col : sorted_) {
      scratch_.clear();
      std::size_t w = begin;
      for (std::size_t i = begin; i < end; ++i) {
        if (goes_left_[col[i]]) {
          col[w++] = col[i];
        } else {
          scratch_.push_back(col[i]);
        }
      }
      std::copy(scratch_.begin(), scratch_.end(), col.begin() + static_cast<std::ptrdiff_t>(w));
    }
    const std::size_t mid = begin + n_left;
    t.nodes[id].feature = best->feature;
    t.nodes[id].threshold = best->threshold;
    const int l = build(t, begin, mid, depth + 1);
    const int r = build(t, mid, end, depth + 1);
    t.nodes[id].left = l;
    t.nodes[id].right = r;
    return id;
  }

  const Matrix& x_;
  std::vector<SplitStats> stats_;
  Criterion crit_;
  GrowConfig cfg_;
  Rng* rng_;
  std::vector<std::vector<std::size_t>> sorted_;
  std::vector<char> goes_left_;
  std::vector<std::size_t> scratch_;
  std::size_t n_active_ = 0;
};

inline std::vector<SplitStats> gini_stats(const std::vector<int>& y, const std::vector<double>& weights) {
  std::vector<SplitStats> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s[i] = {weights[i], weights[i] * y[i], 0.0};
  return s;
}

}  // namespace detail

struct TreeConfig {
  int max_depth = 12;
  int min_leaf = 5;
};

/// CART classification tree (Gini). Leaves hold the positive fraction of their rows.
inline Tree tree_fit(const Matrix& x, const std::vector<int>& y, const TreeConfig& cfg = {}) {
  check_fit_inputs(x, y);
  const std::vector<double> w(y.size(), 1.0);
  detail::TreeGrower<GiniCriterion> grower(x, detail::gini_stats(y, w), GiniCriterion{static_cast<double>(cfg.min_leaf)},
                                           GrowConfig{cfg.max_depth, 0}, nullptr);
  return grower.grow();
}

struct ForestConfig {
  int n_trees = 100;
  /// 0 selects ceil(sqrt(d))
  std::size_t features_per_split = 0;
  int max_depth = 12;
  int min_leaf = 1;
  bool bootstrap = true;
  std::uint64_t seed = 42;
};

struct Forest {
  std::vector<Tree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t features_per_split = 0;

  double predict(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
  }

  bool operator==(const Forest&) const = default;
};

inline Forest rf_fit(const Matrix& x, const std::vector<int>& y, const ForestConfig& cfg = {}) {
  check_fit_inputs(x, y);
  if (x.rows() < 2) throw Error(Errc::DimensionMismatch, "random forest needs at least 2 rows");
  Forest forest;
  const std::size_t d = x.cols();
  forest.features_per_split =
      cfg.features_per_split ? std::min(cfg.features_per_split, d)
                             : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  const std::size_t n = x.rows();
  for (int t = 0; t < cfg.n_trees; ++t) {
    const std::uint64_t seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(t));
    Rng rng(seed);
    std::vector<double> w(n, cfg.bootstrap ? 0.0 : 1.0);
    if (cfg.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) w[uniform_index(rng, n)] += 1.0;
    }
    detail::TreeGrower<GiniCriterion> grower(x, detail::gini_stats(y, w),
                                             GiniCriterion{static_cast<double>(cfg.min_leaf)},
                                             GrowConfig{cfg.max_depth, forest.features_per_split}, &rng);
    forest.trees.push_back(grower.grow());
    forest.tree_seeds.push_back(seed);
  }
  return forest;
}

}  // namespace fd4qc
