#pragma once

// CART decision trees with Gini impurity, bagged into a random forest.
// Splits evaluate max_features randomly drawn features per node, with
// thresholds at midpoints of adjacent observed values. Forest prediction
// is a majority vote over trees; vote ties resolve to the lowest class
// code. Impurity decreases are accumulated per feature during training to
// back the importance report.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/mlcore.hpp"
#include "floodwatch/rng.hpp"

namespace floodwatch {

using ClassHistogram = std::array<std::uint64_t, kClassCount>;

inline double gini_impurity(const ClassHistogram& hist) {
    std::uint64_t total = 0;
    for (std::uint64_t v : hist) total += v;
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (std::uint64_t v : hist) {
        const double p = static_cast<double>(v) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

inline ClassLabel histogram_argmax(const ClassHistogram& hist) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClassCount; ++c)
        if (hist[c] > hist[best]) best = c; // ties keep the lowest code
    return static_cast<ClassLabel>(best);
}

struct TreeNode {
    std::int32_t feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    ClassHistogram histogram{};
};

struct DecisionTree {
    std::vector<TreeNode> nodes;
    std::array<double, kFeatureCount> impurity_decrease{};

    ClassLabel predict(std::span<const double> x) const {
        std::int32_t idx = 0;
        while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
            const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
            idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                              : node.right;
        }
        return histogram_argmax(nodes[static_cast<std::size_t>(idx)].histogram);
    }
};

struct TreeTrainConfig {
    std::size_t max_features = kFeatureCount;
    std::size_t max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_leaf = 1;
};

namespace detail {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = 0.0; // count-weighted Gini decrease
    double left_gini = 0.0;
    double right_gini = 0.0;
};

inline SplitChoice best_split(const Matrix& x, std::span<const ClassLabel> y,
                              std::span<const std::size_t> rows, std::size_t feature,
                              std::size_t min_leaf, double parent_gini) {
    SplitChoice best;
    const std::size_t n = rows.size();

    std::vector<std::pair<double, std::size_t>> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = {x(rows[i], feature), rows[i]};
    std::sort(values.begin(), values.end());

    ClassHistogram left{}, right{};
    for (std::size_t i = 0; i < n; ++i)
        ++right[static_cast<std::size_t>(y[values[i].second])];

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::size_t cls = static_cast<std::size_t>(y[values[i].second]);
        ++left[cls];
        --right[cls];
        if (values[i].first == values[i + 1].first) continue;
        const std::size_t n_left = i + 1, n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;

        const double gl = gini_impurity(left);
        const double gr = gini_impurity(right);
        const double decrease = static_cast<double>(n) * parent_gini -
                                static_cast<double>(n_left) * gl -
                                static_cast<double>(n_right) * gr;
        if (!best.found || decrease > best.decrease) {
            best.found = true;
            best.feature = feature;
            best.threshold = 0.5 * (values[i].first + values[i + 1].first);
            best.decrease = decrease;
            best.left_gini = gl;
            best.right_gini = gr;
        }
    }
    return best;
}

inline std::int32_t grow_tree(DecisionTree& tree, const Matrix& x,
                              std::span<const ClassLabel> y, std::vector<std::size_t>& rows,
                              std::size_t begin, std::size_t end, std::size_t depth,
                              const TreeTrainConfig& config, Xoshiro256& rng) {
    const auto node_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});

    ClassHistogram hist{};
    for (std::size_t i = begin; i < end; ++i) ++hist[static_cast<std::size_t>(y[rows[i]])];
    tree.nodes[static_cast<std::size_t>(node_index)].histogram = hist;

    const std::size_t count = end - begin;
    const double node_gini = gini_impurity(hist);
    if (node_gini == 0.0 || depth >= config.max_depth || count < 2 * config.min_leaf)
        return node_index;

    const std::span<const std::size_t> node_rows(rows.data() + begin, count);
    const std::vector<std::size_t> features = sample_without_replacement(
        x.cols(), std::min(config.max_features, x.cols()), rng);

    SplitChoice best;
    for (std::size_t feature : features) {
        const SplitChoice candidate =
            best_split(x, y, node_rows, feature, config.min_leaf, node_gini);
        if (candidate.found && (!best.found || candidate.decrease > best.decrease)) best = candidate;
    }
    if (!best.found) return node_index;

    tree.impurity_decrease[best.feature] += best.decrease;

    auto mid_it = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                 rows.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::size_t r) { return x(r, best.feature) <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

    const std::int32_t left = grow_tree(tree, x, y, rows, begin, mid, depth + 1, config, rng);
    const std::int32_t right = grow_tree(tree, x, y, rows, mid, end, depth + 1, config, rng);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return node_index;
}

} // namespace detail

inline DecisionTree tree_train(const Matrix& x, std::span<const ClassLabel> y,
                               const TreeTrainConfig& config, Xoshiro256& rng) {
    if (x.rows() == 0) throw TrainingError("empty training data");
    if (x.rows() < 2 * config.min_leaf)
        throw TrainingError("fewer rows than 2 * min_leaf");
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), 0);
    DecisionTree tree;
    detail::grow_tree(tree, x, y, rows, 0, rows.size(), 0, config, rng);
    return tree;
}

struct RandomForestConfig {
    std::size_t n_trees = 100;
    std::size_t max_features = 4; // floor(sqrt(21))
    std::size_t max_depth = std::numeric_limits<std::size_t>::max();
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
};

struct RandomForestModel {
    std::vector<DecisionTree> trees;
    RandomForestConfig config;
    Scaler scaler;
    bool oob_available = false;
    double oob_accuracy = 0.0;
};

inline RandomForestModel rf_train(const LabeledDataset& train, const RandomForestConfig& config) {
    const std::size_t n = train.size();
    if (n < 20) throw TooFewSamples("random forest needs at least 20 rows");
    bool multi_class = false;
    for (std::size_t i = 1; i < n && !multi_class; ++i)
        multi_class = train.y[i] != train.y[0];
    if (!multi_class) throw SingleClassData("training data has a single class");

    RandomForestModel model;
    model.config = config;
    model.scaler = Scaler::fit(train.X);
    const Matrix x = model.scaler.apply(train.X);

    TreeTrainConfig tree_config{config.max_features, config.max_depth, config.min_leaf};
    model.trees.resize(config.n_trees);

    // Out-of-bag bookkeeping: votes from trees whose bootstrap missed the row.
    std::vector<ClassHistogram> oob_votes(n);
    std::vector<std::size_t> bootstrap(n);
    std::vector<bool> in_bag(n);

    for (std::size_t t = 0; t < config.n_trees; ++t) {
        Xoshiro256 rng(derive_seed(config.seed, t));
        std::fill(in_bag.begin(), in_bag.end(), false);
        Matrix xb(0, x.cols());
        std::vector<ClassLabel> yb;
        yb.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto pick = static_cast<std::size_t>(rng.uniform_u64(n));
            xb.push_row(x.row(pick));
            yb.push_back(train.y[pick]);
            in_bag[pick] = true;
        }
        std::vector<std::size_t> rows(n);
        std::iota(rows.begin(), rows.end(), 0);
        detail::grow_tree(model.trees[t], xb, yb, rows, 0, n, 0, tree_config, rng);

        for (std::size_t i = 0; i < n; ++i)
            if (!in_bag[i])
                ++oob_votes[i][static_cast<std::size_t>(model.trees[t].predict(x.row(i)))];
    }

    std::uint64_t oob_total = 0, oob_correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t votes = 0;
        for (std::uint64_t v : oob_votes[i]) votes += v;
        if (votes == 0) continue;
        ++oob_total;
        if (histogram_argmax(oob_votes[i]) == train.y[i]) ++oob_correct;
    }
    if (oob_total > 0) {
        model.oob_available = true;
        model.oob_accuracy = static_cast<double>(oob_correct) / static_cast<double>(oob_total);
    }
    return model;
}

inline std::array<double, kClassCount> rf_predict_proba(const RandomForestModel& model,
                                                        std::span<const double> x) {
    const std::vector<double> x_std = model.scaler.apply_row(x);
    std::array<double, kClassCount> votes{};
    for (const DecisionTree& tree : model.trees)
        votes[static_cast<std::size_t>(tree.predict(x_std))] += 1.0;
    for (double& v : votes) v /= static_cast<double>(model.trees.size());
    return votes;
}

inline ClassLabel rf_predict(const RandomForestModel& model, std::span<const double> x) {
    const auto proba = rf_predict_proba(model, x);
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClassCount; ++c)
        if (proba[c] > proba[best]) best = c; // ties keep the lowest code
    return static_cast<ClassLabel>(best);
}

inline ClassLabel rf_predict(const RandomForestModel& model, const FeatureVector& fv) {
    return rf_predict(model, std::span<const double>(fv.data(), fv.size()));
}

struct FeatureImportanceReport {
    std::array<double, kFeatureCount> importance{}; // sums to 1
    std::array<std::size_t, kFeatureCount> ranking{}; // feature indices, descending importance
};

inline FeatureImportanceReport rf_feature_importance(const RandomForestModel& model) {
    FeatureImportanceReport report;
    double total = 0.0;
    for (const DecisionTree& tree : model.trees)
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            report.importance[f] += tree.impurity_decrease[f];
            total += tree.impurity_decrease[f];
        }
    if (total > 0.0)
        for (double& v : report.importance) v /= total;

    std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [&report](std::size_t a, std::size_t b) {
                         return report.importance[a] > report.importance[b];
                     });
    return report;
}

} // namespace floodwatch
