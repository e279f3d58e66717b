#pragma once

// Isolation forest over standardized features. Each tree is grown on a
// psi-subsample with uniform random feature/split choices; the anomaly
// score is s(x) = 2^(-E[h(x)] / c(psi)) where h counts edges to the leaf
// plus the unsuccessful-search correction c(leaf size).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/mlcore.hpp"
#include "floodwatch/rng.hpp"

namespace floodwatch {

// Average path length of an unsuccessful search in a binary search tree of
// n items: 2 H(n-1) - 2 (n-1)/n, with the harmonic number approximated by
// H(i) = ln(i) + Euler-Mascheroni. Defined as 0 for n < 2.
inline double c_factor(std::size_t n) {
    if (n < 2) return 0.0;
    const double m = static_cast<double>(n - 1);
    return 2.0 * (std::log(m) + 0.5772156649) - 2.0 * m / static_cast<double>(n);
}

struct IsoTreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t size = 0;
};

struct IsoTree {
    std::vector<IsoTreeNode> nodes; // node 0 is the root

    double path_length(std::span<const double> x) const {
        std::int32_t idx = 0;
        double edges = 0.0;
        while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
            const IsoTreeNode& node = nodes[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left
                                                                             : node.right;
            edges += 1.0;
        }
        return edges + c_factor(nodes[static_cast<std::size_t>(idx)].size);
    }
};

struct IsoForestModel {
    std::vector<IsoTree> trees;
    std::size_t n_trees = 0;
    std::size_t psi = 0;
    double threshold = 0.0; // score above this is anomalous
    Scaler scaler;
};

namespace detail {

inline std::int32_t grow_iso_tree(IsoTree& tree, const Matrix& x,
                                  std::vector<std::size_t>& indices, std::size_t begin,
                                  std::size_t end, std::size_t depth, std::size_t max_depth,
                                  Xoshiro256& rng) {
    const std::size_t count = end - begin;
    const auto node_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});

    if (count <= 1 || depth >= max_depth) {
        tree.nodes[static_cast<std::size_t>(node_index)].size =
            static_cast<std::uint32_t>(count);
        return node_index;
    }

    // Only features that actually vary in this node can split it.
    std::vector<std::size_t> candidates;
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double lo = x(indices[begin], c), hi = lo;
        for (std::size_t i = begin + 1; i < end; ++i) {
            lo = std::min(lo, x(indices[i], c));
            hi = std::max(hi, x(indices[i], c));
        }
        if (hi > lo) candidates.push_back(c);
    }
    if (candidates.empty()) {
        tree.nodes[static_cast<std::size_t>(node_index)].size =
            static_cast<std::uint32_t>(count);
        return node_index;
    }

    const std::size_t feature = candidates[rng.uniform_u64(candidates.size())];
    double lo = x(indices[begin], feature), hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
        lo = std::min(lo, x(indices[i], feature));
        hi = std::max(hi, x(indices[i], feature));
    }
    const double threshold = rng.uniform(lo, hi);

    auto mid_it = std::partition(indices.begin() + static_cast<std::ptrdiff_t>(begin),
                                 indices.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::size_t i) { return x(i, feature) < threshold; });
    auto mid = static_cast<std::size_t>(mid_it - indices.begin());
    // A degenerate draw (threshold at the minimum) still has to make progress.
    if (mid == begin) mid = begin + 1;
    if (mid == end) mid = end - 1;

    const std::int32_t left =
        grow_iso_tree(tree, x, indices, begin, mid, depth + 1, max_depth, rng);
    const std::int32_t right =
        grow_iso_tree(tree, x, indices, mid, end, depth + 1, max_depth, rng);
    IsoTreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
    node.feature = static_cast<std::int32_t>(feature);
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    node.size = static_cast<std::uint32_t>(count);
    return node_index;
}

} // namespace detail

inline double iforest_score_standardized(const IsoForestModel& model,
                                         std::span<const double> x_std) {
    double mean_path = 0.0;
    for (const IsoTree& tree : model.trees) mean_path += tree.path_length(x_std);
    mean_path /= static_cast<double>(model.trees.size());
    return std::exp2(-mean_path / c_factor(model.psi));
}

inline double iforest_score(const IsoForestModel& model, std::span<const double> x) {
    return iforest_score_standardized(model, model.scaler.apply_row(x));
}

inline int iforest_predict(const IsoForestModel& model, std::span<const double> x) {
    return iforest_score(model, x) > model.threshold ? -1 : +1;
}

inline IsoForestModel iforest_train(const Matrix& x_raw, std::size_t n_trees, std::size_t psi,
                                    double contamination, std::uint64_t seed) {
    const std::size_t n = x_raw.rows();
    if (psi < 2) throw TooFewSamples("psi must be at least 2");
    if (n < psi) throw TooFewSamples("need at least psi training rows");

    IsoForestModel model;
    model.scaler = Scaler::fit(x_raw);
    const Matrix x = model.scaler.apply(x_raw);
    model.n_trees = n_trees;
    model.psi = psi;
    const auto max_depth =
        static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));

    model.trees.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Xoshiro256 rng(derive_seed(seed, t));
        std::vector<std::size_t> sample = sample_without_replacement(n, psi, rng);
        detail::grow_iso_tree(model.trees[t], x, sample, 0, sample.size(), 0, max_depth, rng);
    }

    // Threshold at the (1 - contamination) quantile of training scores, so
    // the configured fraction of the training set lands above it.
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) scores[i] = iforest_score_standardized(model, x.row(i));
    std::sort(scores.begin(), scores.end(), std::greater<>());
    const auto k_above = static_cast<std::size_t>(
        std::floor(contamination * static_cast<double>(n) + 1e-9));
    model.threshold = scores[std::min(k_above, n - 1)];
    return model;
}

} // namespace floodwatch
