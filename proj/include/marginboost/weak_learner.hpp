// Depth-limited binary decision trees over a fixed per-feature threshold
// grid: the weak classifiers consumed by the boosting loop.
//
// The hypothesis space is the antisymmetric one of size 2*m*p per split
// level: each split carries one of the two leaf-sign assignments (-,+) or
// (+,-), i.e. h and -h are both searched. Splits are scored by weighted
// misclassification (the quantity boosting consumes). At equal error a split
// with both sides populated beats one with an empty side (an empty split
// stalls the greedy recursion); remaining ties break by lowest feature index,
// then lowest threshold index, then left leaf -1. Routing uses
// x[feature] <= threshold for the left branch.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "marginboost/dataset.hpp"
#include "marginboost/errors.hpp"

namespace marginboost {

/// Candidate split thresholds t_j = (j - 0.5)/m, identical for every feature.
struct ThresholdGrid {
    std::size_t thresholds_per_feature = 0;
    std::vector<double> values;  // strictly increasing, all in (0,1)

    double value(std::size_t index_1based) const { return values[index_1based - 1]; }
};

inline ThresholdGrid build_grid(std::size_t m) {
    if (m < 1) throw std::invalid_argument("threshold count must be >= 1");
    ThresholdGrid grid;
    grid.thresholds_per_feature = m;
    grid.values.resize(m);
    for (std::size_t j = 1; j <= m; ++j)
        grid.values[j - 1] = (static_cast<double>(j) - 0.5) / static_cast<double>(m);
    return grid;
}

/// The boosting distribution D over training observations.
using WeightVector = std::vector<double>;

struct TreeNode {
    int feature = 0;
    int threshold_index = 1;  // 1-based into the grid
    double threshold = 0.0;   // grid value, kept for self-contained prediction
};

/// Complete binary tree of fixed depth: 2^depth - 1 internal nodes in heap
/// order (children of node i at 2i+1 / 2i+2) and 2^depth leaf labels.
struct DecisionTree {
    int depth = 1;
    std::vector<TreeNode> nodes;
    std::vector<int> leaf_labels;  // -1 / +1

    int terminal_count() const { return static_cast<int>(leaf_labels.size()); }

    int predict(std::span<const double> x) const {
        std::size_t node = 0;
        const std::size_t internal = nodes.size();
        while (node < internal) {
            const TreeNode& s = nodes[node];
            const bool left = x[static_cast<std::size_t>(s.feature)] <= s.threshold;
            node = 2 * node + (left ? 1 : 2);
        }
        return leaf_labels[node - internal];
    }
};

inline int predict_tree(const DecisionTree& tree, std::span<const double> x) {
    return tree.predict(x);
}

/// ln|H| for the fixed grid: ln(2*m*p) for stumps, 3*ln(2*m*p) for depth-2
/// trees. Other depths have no defined cardinality.
inline double log_hypothesis_count(std::size_t p, std::size_t m, int depth) {
    if (p < 1 || m < 1) throw std::invalid_argument("need p >= 1 and m >= 1");
    const double base = std::log(2.0 * static_cast<double>(m) * static_cast<double>(p));
    if (depth == 1) return base;
    if (depth == 2) return 3.0 * base;
    throw std::invalid_argument("hypothesis count is defined for depth 1 and 2 only");
}

/// Greedy top-down trainer. Bin indices (position of each value on the grid)
/// are cached on construction so repeated calls across boosting rounds skip
/// the per-round binary searches.
class TreeTrainer {
  public:
    TreeTrainer(const Dataset& ds, const ThresholdGrid& grid) : ds_(&ds), grid_(&grid) {
        if (ds.empty()) throw DataError("cannot train on an empty dataset");
        const std::size_t n = ds.n_rows, p = ds.n_cols, m = grid.thresholds_per_feature;
        bins_.resize(n * p);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j) {
                // number of grid values strictly below x: sample is routed
                // left exactly by thresholds with 1-based index > bin
                const double x = ds.at(i, j);
                const auto it = std::lower_bound(grid.values.begin(), grid.values.end(), x);
                bins_[i * p + j] = static_cast<std::uint32_t>(it - grid.values.begin());
            }
        }
        (void)m;
    }

    DecisionTree train(const WeightVector& weights, int depth) const {
        if (depth < 1) throw std::invalid_argument("tree depth must be >= 1");
        if (weights.size() != ds_->n_rows)
            throw std::invalid_argument("weight vector length does not match dataset");

        DecisionTree tree;
        tree.depth = depth;
        tree.nodes.resize((std::size_t{1} << depth) - 1);
        tree.leaf_labels.resize(std::size_t{1} << depth);

        std::vector<std::size_t> all(ds_->n_rows);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        const int root_majority = majority_label(all, weights, +1);
        build_node(tree, 0, all, weights, 1, root_majority);
        return tree;
    }

  private:
    struct Split {
        int feature = 0;
        int threshold_index = 1;
        int left_label = -1;  // right leaf is the negation
        double error = 0.0;
        bool one_sided = false;  // a side of the induced partition is empty
    };

    int majority_label(const std::vector<std::size_t>& sample, const WeightVector& w,
                       int fallback) const {
        if (sample.empty()) return fallback;
        double s = 0.0;
        for (std::size_t i : sample) s += w[i] * ds_->labels[i];
        return s < 0.0 ? -1 : +1;  // ties go to +1
    }

    bool is_pure(const std::vector<std::size_t>& sample) const {
        for (std::size_t i : sample)
            if (ds_->labels[i] != ds_->labels[sample.front()]) return false;
        return true;
    }

    // Best (feature, threshold, polarity) by weighted error over the node
    // sample. Per feature this is one bucketed pass plus a prefix scan.
    Split best_split(const std::vector<std::size_t>& sample, const WeightVector& w) const {
        const std::size_t p = ds_->n_cols, m = grid_->thresholds_per_feature;
        double w_pos = 0.0, w_neg = 0.0;
        for (std::size_t i : sample) (ds_->labels[i] > 0 ? w_pos : w_neg) += w[i];
        const double w_tot = w_pos + w_neg;

        Split best;
        best.error = w_tot + 1.0;  // worse than any candidate
        best.one_sided = true;
        const auto better = [&](double err, bool one_sided) {
            if (err < best.error) return true;
            return err == best.error && best.one_sided && !one_sided;
        };

        std::vector<double> pos(m + 1), neg(m + 1);
        std::vector<std::size_t> cnt(m + 1);
        for (std::size_t f = 0; f < p; ++f) {
            std::fill(pos.begin(), pos.end(), 0.0);
            std::fill(neg.begin(), neg.end(), 0.0);
            std::fill(cnt.begin(), cnt.end(), std::size_t{0});
            for (std::size_t i : sample) {
                const std::uint32_t b = bins_[i * p + f];
                (ds_->labels[i] > 0 ? pos[b] : neg[b]) += w[i];
                ++cnt[b];
            }
            double cum_pos = 0.0, cum_neg = 0.0;
            std::size_t cum_cnt = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                cum_pos += pos[j - 1];  // left mass: samples with bin < j
                cum_neg += neg[j - 1];
                cum_cnt += cnt[j - 1];
                const bool one_sided = cum_cnt == 0 || cum_cnt == sample.size();
                const double err_neg_left = cum_pos + (w_neg - cum_neg);
                const double err_pos_left = w_tot - err_neg_left;
                if (better(err_neg_left, one_sided)) {
                    best = {static_cast<int>(f), static_cast<int>(j), -1, err_neg_left,
                            one_sided};
                }
                if (better(err_pos_left, one_sided)) {
                    best = {static_cast<int>(f), static_cast<int>(j), +1, err_pos_left,
                            one_sided};
                }
            }
        }
        if (best.error > w_tot) best = {0, 1, -1, 0.0, true};  // empty sample
        return best;
    }

    void build_node(DecisionTree& tree, std::size_t node, const std::vector<std::size_t>& sample,
                    const WeightVector& w, int level, int inherited) const {
        const int majority = majority_label(sample, w, inherited);
        const Split split = best_split(sample, w);
        tree.nodes[node] = {split.feature, split.threshold_index,
                            grid_->value(static_cast<std::size_t>(split.threshold_index))};

        const std::size_t p = ds_->n_cols;
        std::vector<std::size_t> left, right;
        left.reserve(sample.size());
        right.reserve(sample.size());
        for (std::size_t i : sample) {
            const bool goes_left =
                bins_[i * p + static_cast<std::size_t>(split.feature)] <
                static_cast<std::uint32_t>(split.threshold_index);
            (goes_left ? left : right).push_back(i);
        }

        if (level == tree.depth) {
            const std::size_t leaf = 2 * node + 1 - tree.nodes.size();
            // Forced growth: a pure node or an empty side keeps the split
            // record but labels both leaves with the node majority.
            if (sample.empty() || is_pure(sample) || left.empty() || right.empty()) {
                tree.leaf_labels[leaf] = majority;
                tree.leaf_labels[leaf + 1] = majority;
            } else {
                tree.leaf_labels[leaf] = split.left_label;
                tree.leaf_labels[leaf + 1] = -split.left_label;
            }
            return;
        }
        build_node(tree, 2 * node + 1, left, w, level + 1, majority);
        build_node(tree, 2 * node + 2, right, w, level + 1, majority);
    }

    const Dataset* ds_;
    const ThresholdGrid* grid_;
    std::vector<std::uint32_t> bins_;
};

/// One-shot training entry point; boosting loops keep a TreeTrainer instead.
inline DecisionTree train_tree(const Dataset& ds, const WeightVector& weights, int depth,
                               const ThresholdGrid& grid) {
    return TreeTrainer(ds, grid).train(weights, depth);
}

}  // namespace marginboost
