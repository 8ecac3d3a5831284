#pragma once

// Random forest of CART trees: bootstrap samples, Gini splits over a random
// feature subset per node, majority vote.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "phmprep/core/error.hpp"
#include "phmprep/core/matrix.hpp"
#include "phmprep/core/random.hpp"
#include "phmprep/prepare.hpp"

namespace phmprep {

inline constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

struct ForestParams {
  std::size_t n_trees = 100;
  int max_depth = kUnlimitedDepth;
  std::size_t min_samples_leaf = 1;
  std::size_t features_per_split = 0;  // 0 = ceil(sqrt(d))
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency; results do not depend on it

  void validate() const {
    if (n_trees < 1) throw Error(Errc::InvalidArgument, "n_trees must be >= 1");
    if (max_depth < 1) throw Error(Errc::InvalidArgument, "max_depth must be >= 1");
    if (min_samples_leaf < 1) throw Error(Errc::InvalidArgument, "min_samples_leaf must be >= 1");
  }

  friend bool operator==(const ForestParams& a, const ForestParams& b) {
    return a.n_trees == b.n_trees && a.max_depth == b.max_depth && a.min_samples_leaf == b.min_samples_leaf &&
           a.features_per_split == b.features_per_split && a.seed == b.seed;
  }
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // fraction of degraded samples reaching the node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double leaf_value(std::span<const double> x) const {
    std::size_t k = 0;
    while (nodes[k].feature >= 0)
      k = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[k].feature)] <= nodes[k].threshold ? nodes[k].left
                                                                                                        : nodes[k].right);
    return nodes[k].value;
  }

  int vote(std::span<const double> x) const { return leaf_value(x) >= 0.5 ? 1 : 0; }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes.size(), 0);
    std::size_t best = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      best = std::max(best, d[k]);
      if (nodes[k].feature >= 0) {
        d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
        d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
      }
    }
    return best;
  }
};

struct ForestModel {
  ForestParams params;
  std::size_t n_features = 0;
  std::vector<DecisionTree> trees;
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<int>& y, const ForestParams& params, std::size_t mtry)
      : x_(x), y_(y), params_(params), mtry_(mtry), features_(x.cols()) {}

  DecisionTree build(std::vector<std::size_t> rows, std::uint64_t seed) {
    tree_ = DecisionTree{};
    rows_ = std::move(rows);
    grow(0, rows_.size(), 0, seed);
    return std::move(tree_);
  }

 private:
  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
  };

  // Node seeds derive from the parent's, so a shallower tree with the same
  // seed is a prefix of a deeper one.
  std::int32_t grow(std::size_t begin, std::size_t end, int depth, std::uint64_t seed) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::size_t pos = 0;
    for (std::size_t i = begin; i < end; ++i) pos += static_cast<std::size_t>(y_[rows_[i]]);
    const std::size_t n = end - begin;
    tree_.nodes[static_cast<std::size_t>(id)].value = static_cast<double>(pos) / static_cast<double>(n);
    if (pos == 0 || pos == n || depth >= params_.max_depth || n < 2 * params_.min_samples_leaf) return id;

    const Split split = best_split(begin, end, pos, seed);
    if (!std::isfinite(split.score)) return id;

    auto mid_it = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                 rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::size_t r) { return x_(r, split.feature) <= split.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - rows_.begin());
    const std::int32_t left = grow(begin, mid, depth + 1, derive_seed(seed, std::uint64_t{1}));
    const std::int32_t right = grow(mid, end, depth + 1, derive_seed(seed, std::uint64_t{2}));
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<std::int32_t>(split.feature);
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  /// Visits features in random order until `mtry` features that admit a valid
  /// split have been scored.
  Split best_split(std::size_t begin, std::size_t end, std::size_t total_pos, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = 0; i < features_.size(); ++i) features_[i] = i;
    rng.shuffle(features_);
    Split best;
    std::size_t scored = 0;
    const std::size_t n = end - begin;
    const std::size_t leaf = params_.min_samples_leaf;
    for (std::size_t f : features_) {
      if (scored >= mtry_) break;
      scratch_.clear();
      for (std::size_t i = begin; i < end; ++i) scratch_.push_back({x_(rows_[i], f), y_[rows_[i]]});
      std::sort(scratch_.begin(), scratch_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (scratch_.front().first == scratch_.back().first) continue;
      bool any = false;
      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += static_cast<std::size_t>(scratch_[i].second);
        const std::size_t nl = i + 1, nr = n - nl;
        if (scratch_[i].first == scratch_[i + 1].first || nl < leaf || nr < leaf) continue;
        any = true;
        const double pl = static_cast<double>(left_pos), ql = static_cast<double>(nl - left_pos);
        const double pr = static_cast<double>(total_pos - left_pos), qr = static_cast<double>(nr - (total_pos - left_pos));
        const double score = pl * ql / static_cast<double>(nl) + pr * qr / static_cast<double>(nr);
        if (score < best.score) {
          const double a = scratch_[i].first, b = scratch_[i + 1].first;
          double mid = a + (b - a) * 0.5;
          if (!(mid < b)) mid = a;
          best = {f, mid, score};
        }
      }
      if (any) ++scored;
    }
    return best;
  }

  const Matrix& x_;
  const std::vector<int>& y_;
  const ForestParams& params_;
  std::size_t mtry_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, int>> scratch_;
  std::vector<std::size_t> rows_;
  DecisionTree tree_;
};

}  // namespace detail

inline ForestModel train_forest(const LabeledSet& train, const ForestParams& params) {
  params.validate();
  const std::size_t pos = train.positives();
  if (pos < 2 || train.size() - pos < 2)
    throw Error(Errc::SingleClassInput, "need at least two samples of each class, got " + std::to_string(pos) +
                                            " degraded and " + std::to_string(train.size() - pos) + " healthy");
  const std::size_t d = train.x.cols();
  const std::size_t mtry =
      params.features_per_split > 0
          ? std::min(params.features_per_split, d)
          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));

  ForestModel model;
  model.params = params;
  model.n_features = d;
  model.trees.resize(params.n_trees);
  const std::size_t n = train.size();

  auto build_range = [&](std::size_t first, std::size_t step) {
    detail::TreeBuilder builder(train.x, train.y, params, mtry);
    for (std::size_t t = first; t < params.n_trees; t += step) {
      const std::uint64_t tree_seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
      Rng rng(derive_seed(tree_seed, "bootstrap"));
      std::vector<std::size_t> rows(n);
      for (auto& r : rows) r = rng.index(n);
      model.trees[t] = builder.build(std::move(rows), derive_seed(tree_seed, "nodes"));
    }
  };
  std::size_t threads = params.threads ? params.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, params.n_trees);
  if (threads <= 1) {
    build_range(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(build_range, k, threads);
    for (auto& th : pool) th.join();
  }
  return model;
}

/// Majority vote; ties go to degraded.
inline std::vector<int> predict(const ForestModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.n_features)
    throw Error(Errc::FeatureMismatch, "forest expects " + std::to_string(model.n_features) + " features, got " +
                                           std::to_string(x.cols()));
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::size_t votes = 0;
    for (const auto& tree : model.trees) votes += static_cast<std::size_t>(tree.vote(x.row(r)));
    out[r] = 2 * votes >= model.trees.size() ? 1 : 0;
  }
  return out;
}

}  // namespace phmprep
