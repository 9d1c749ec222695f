#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "bidbench/models/common.hpp"
#include "bidbench/rng.hpp"

namespace bidbench {

/// Appendix-style forest grid; max_depth 0 means unlimited.
struct RfGrid {
  std::vector<std::size_t> trees{100, 500};
  std::vector<std::size_t> max_depth{0, 10};
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1, right = -1;
  double value = 0.0;  // positive fraction at this node
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(const double* f) const {
    int k = 0;
    while (nodes[std::size_t(k)].feature >= 0) {
      const TreeNode& nd = nodes[std::size_t(k)];
      k = f[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[std::size_t(k)].value;
  }
};

namespace detail {

/// CART with Gini impurity on a bootstrap sample. Candidate features are
/// drawn without replacement per node; thresholds are midpoints between
/// consecutive distinct values; ties between splits resolve toward the
/// earlier candidate feature and the lower threshold, so tree construction
/// is a pure function of (data, rng).
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<double>& features, std::span<const int> y, std::size_t p,
              std::size_t mtry, std::size_t max_depth, Rng rng)
      : features_(features), y_(y), p_(p), mtry_(mtry),
        max_depth_(max_depth == 0 ? 64 : max_depth), rng_(rng) {}

  DecisionTree build(std::vector<std::uint32_t> bootstrap) {
    idx_ = std::move(bootstrap);
    DecisionTree tree;
    nodes_ = &tree.nodes;
    grow(0, idx_.size(), 0);
    return tree;
  }

 private:
  int grow(std::size_t lo, std::size_t hi, std::size_t depth) {
    const std::size_t n = hi - lo;
    std::size_t pos = 0;
    for (std::size_t i = lo; i < hi; ++i) pos += std::size_t(y_[idx_[i]]);

    const int node_id = int(nodes_->size());
    nodes_->push_back({});
    (*nodes_)[std::size_t(node_id)].value = double(pos) / double(n);

    if (depth >= max_depth_ || n < 2 || pos == 0 || pos == n) return node_id;

    int best_feature = -1;
    double best_threshold = 0.0, best_gini = std::numeric_limits<double>::infinity();

    // Sample the candidate features for this node.
    feats_.resize(p_);
    std::iota(feats_.begin(), feats_.end(), 0u);
    for (std::size_t k = 0; k < mtry_; ++k)
      std::swap(feats_[k], feats_[k + std::size_t(rng_.below(p_ - k))]);

    for (std::size_t c = 0; c < mtry_; ++c) {
      const std::size_t f = feats_[c];
      order_.clear();
      for (std::size_t i = lo; i < hi; ++i)
        order_.emplace_back(features_[idx_[i] * p_ + f], y_[idx_[i]]);
      std::sort(order_.begin(), order_.end());

      std::size_t pos_left = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        pos_left += std::size_t(order_[k].second);
        if (order_[k].first == order_[k + 1].first) continue;
        const double nl = double(k + 1), nr = double(n - k - 1);
        const double pl = double(pos_left) / nl;
        const double pr = double(pos - pos_left) / nr;
        const double gini =
            (nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr)) / double(n);
        if (gini < best_gini - 1e-15) {
          best_gini = gini;
          best_feature = int(f);
          best_threshold = 0.5 * (order_[k].first + order_[k + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;  // every candidate feature constant

    const auto mid = std::partition(idx_.begin() + long(lo), idx_.begin() + long(hi),
                                    [&](std::uint32_t i) {
                                      return features_[i * p_ + std::size_t(best_feature)] <=
                                             best_threshold;
                                    });
    const std::size_t cut = std::size_t(mid - idx_.begin());
    if (cut == lo || cut == hi) return node_id;  // numeric degeneracy guard

    (*nodes_)[std::size_t(node_id)].feature = best_feature;
    (*nodes_)[std::size_t(node_id)].threshold = best_threshold;
    const int left = grow(lo, cut, depth + 1);
    const int right = grow(cut, hi, depth + 1);
    (*nodes_)[std::size_t(node_id)].left = left;
    (*nodes_)[std::size_t(node_id)].right = right;
    return node_id;
  }

  const std::vector<double>& features_;
  std::span<const int> y_;
  std::size_t p_, mtry_, max_depth_;
  Rng rng_;
  std::vector<std::uint32_t> idx_;
  std::vector<std::size_t> feats_;
  std::vector<std::pair<double, int>> order_;
  std::vector<TreeNode>* nodes_ = nullptr;
};

}  // namespace detail

/// Bagged CART ensemble on [x, b]; prediction is the mean leaf positive
/// fraction over the trees.
class ForestModel final : public ResponseModel {
 public:
  ForestModel(std::vector<DecisionTree> trees, std::size_t dim)
      : trees_(std::move(trees)), dim_(dim) {}

  double predict(double b, std::span<const double> x) const override {
    std::vector<double> f(x.begin(), x.end());
    f.push_back(b);
    double s = 0.0;
    for (const auto& t : trees_) s += t.predict(f.data());
    return s / double(trees_.size());
  }

  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  std::size_t dim_;
};

inline FittedModel fit_random_forest(const PricingDataset& train,
                                     const PricingDataset& validation, const RfGrid& grid,
                                     std::uint64_t seed) {
  if (train.size() < 2) throw ArgumentError("fit_random_forest: need at least 2 rows");
  if (grid.trees.empty() || grid.max_depth.empty())
    throw ArgumentError("fit_random_forest: empty grid");

  const std::size_t n = train.size();
  const std::size_t d = train.covariates.cols;
  const std::size_t p = d + 1;
  std::vector<double> features(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = train.covariates.row(i);
    std::copy(x.begin(), x.end(), features.begin() + long(i * p));
    features[i * p + d] = train.bids[i];
  }
  const std::size_t mtry = std::max<std::size_t>(1, std::size_t(std::sqrt(double(p))));
  const std::size_t max_trees = *std::max_element(grid.trees.begin(), grid.trees.end());

  // Tree t under a given depth cap is independent of how many trees the
  // config asks for, so the largest forest per depth is grown once and the
  // smaller tree-counts reuse its prefix.
  std::map<std::size_t, std::vector<DecisionTree>> forest_by_depth;
  const auto forest_for_depth = [&](std::size_t depth) -> const std::vector<DecisionTree>& {
    auto it = forest_by_depth.find(depth);
    if (it != forest_by_depth.end()) return it->second;
    std::vector<DecisionTree> trees;
    trees.reserve(max_trees);
    const Rng root =
        Rng(derive_seed(seed, "random_forest/depth=" + std::to_string(depth)));
    for (std::size_t t = 0; t < max_trees; ++t) {
      Rng tree_rng = root.fork(t);
      std::vector<std::uint32_t> bootstrap(n);
      for (auto& b : bootstrap) b = std::uint32_t(tree_rng.below(n));
      detail::TreeBuilder builder(features, train.outcomes, p, mtry, depth, tree_rng);
      trees.push_back(builder.build(std::move(bootstrap)));
    }
    return forest_by_depth.emplace(depth, std::move(trees)).first->second;
  };

  std::shared_ptr<ForestModel> best;
  Hyperparams best_hp;
  double best_brier = std::numeric_limits<double>::infinity();
  for (const std::size_t trees : grid.trees) {
    for (const std::size_t depth : grid.max_depth) {
      const auto& full = forest_for_depth(depth);
      auto model = std::make_shared<ForestModel>(
          std::vector<DecisionTree>(full.begin(), full.begin() + long(trees)), d);
      const double brier = validation_brier(*model, validation);
      if (brier < best_brier) {
        best_brier = brier;
        best = std::move(model);
        best_hp = {{"trees", std::to_string(trees)},
                   {"max_depth", depth == 0 ? std::string("none") : std::to_string(depth)}};
      }
    }
  }
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::random_forest, std::move(best), std::move(best_hp), d, lo, hi);
}

}  // namespace bidbench
