#pragma once

// Reference classifiers evaluated against the random forest: one-vs-rest
// linear SVM (Pegasos-style stochastic subgradient on the hinge loss),
// one-vs-rest logistic regression (full-batch gradient descent to a
// gradient-norm tolerance), and k-nearest-neighbours with majority vote.
// All operate on standardized features; multiclass argmax ties resolve to
// the lowest class code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/mlcore.hpp"
#include "floodwatch/rng.hpp"

namespace floodwatch {

enum class BaselineVariant : int { LinearSvm = 0, LogisticRegression = 1, Knn = 2 };

inline std::string_view baseline_name(BaselineVariant v) {
    switch (v) {
        case BaselineVariant::LinearSvm: return "linear_svm";
        case BaselineVariant::LogisticRegression: return "logistic_regression";
        case BaselineVariant::Knn: return "knn";
    }
    return "?";
}

struct BaselineHyperparams {
    // Linear SVM
    double svm_lambda = 1e-4;
    std::size_t svm_epochs = 50;
    // Logistic regression
    double logreg_l2 = 1e-4;
    double logreg_tolerance = 1e-5;
    std::size_t logreg_max_iters = 5000;
    // KNN
    std::size_t knn_k = 5;
};

struct BaselineModel {
    BaselineVariant variant = BaselineVariant::Knn;
    BaselineHyperparams hyperparams;
    Scaler scaler;
    // Linear models: one weight vector (plus bias) per class, one-vs-rest.
    Matrix weights; // kClassCount x d
    std::vector<double> biases;
    // KNN: the standardized training set.
    Matrix train_x;
    std::vector<ClassLabel> train_y;
};

namespace detail {

inline void check_multiclass(std::span<const ClassLabel> y) {
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] != y[0]) return;
    throw SingleClassData("training data has a single class");
}

inline void train_linear_svm(BaselineModel& model, const Matrix& x,
                             std::span<const ClassLabel> y, std::uint64_t seed) {
    const std::size_t n = x.rows(), d = x.cols();
    const double lambda = model.hyperparams.svm_lambda;
    model.weights = Matrix(kClassCount, d);
    model.biases.assign(kClassCount, 0.0);

    for (std::size_t cls = 0; cls < kClassCount; ++cls) {
        Xoshiro256 rng(derive_seed(seed, 11 + cls));
        std::vector<double> w(d, 0.0);
        double b = 0.0;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);

        std::size_t t = 0;
        for (std::size_t epoch = 0; epoch < model.hyperparams.svm_epochs; ++epoch) {
            shuffle(order, rng);
            for (std::size_t i : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const double target =
                    static_cast<std::size_t>(y[i]) == cls ? 1.0 : -1.0;
                const double margin = target * (dot(w, x.row(i)) + b);
                const double decay = 1.0 - eta * lambda;
                for (double& wc : w) wc *= decay;
                if (margin < 1.0) {
                    for (std::size_t c = 0; c < d; ++c) w[c] += eta * target * x(i, c);
                    b += eta * target;
                }
            }
        }
        for (std::size_t c = 0; c < d; ++c) model.weights(cls, c) = w[c];
        model.biases[cls] = b;
    }
}

inline double logistic_loss(const Matrix& x, std::span<const ClassLabel> y, std::size_t cls,
                            std::span<const double> w, double b, double l2) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double target = static_cast<std::size_t>(y[i]) == cls ? 1.0 : 0.0;
        const double z = dot(w, x.row(i)) + b;
        // log(1 + exp(z)) - target * z, evaluated stably.
        const double log1pexp = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += log1pexp - target * z;
    }
    loss /= static_cast<double>(x.rows());
    loss += 0.5 * l2 * dot(w, w);
    return loss;
}

inline void train_logistic(BaselineModel& model, const Matrix& x, std::span<const ClassLabel> y) {
    const std::size_t n = x.rows(), d = x.cols();
    const double l2 = model.hyperparams.logreg_l2;
    model.weights = Matrix(kClassCount, d);
    model.biases.assign(kClassCount, 0.0);

    for (std::size_t cls = 0; cls < kClassCount; ++cls) {
        std::vector<double> w(d, 0.0), grad_w(d);
        double b = 0.0;

        double step = 1.0;
        bool converged = false;
        for (std::size_t iter = 0; iter < model.hyperparams.logreg_max_iters; ++iter) {
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            double grad_b = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double target = static_cast<std::size_t>(y[i]) == cls ? 1.0 : 0.0;
                const double z = dot(w, x.row(i)) + b;
                const double p = 1.0 / (1.0 + std::exp(-z));
                const double resid = (p - target) / static_cast<double>(n);
                for (std::size_t c = 0; c < d; ++c) grad_w[c] += resid * x(i, c);
                grad_b += resid;
            }
            for (std::size_t c = 0; c < d; ++c) grad_w[c] += l2 * w[c];

            double norm_sq = grad_b * grad_b;
            for (double g : grad_w) norm_sq += g * g;
            if (std::sqrt(norm_sq) < model.hyperparams.logreg_tolerance) {
                converged = true;
                break;
            }

            // Fixed-step descent with halving on overshoot keeps this free
            // of a Lipschitz estimate.
            const double loss_before = logistic_loss(x, y, cls, w, b, l2);
            for (;;) {
                std::vector<double> w_next(d);
                for (std::size_t c = 0; c < d; ++c) w_next[c] = w[c] - step * grad_w[c];
                const double b_next = b - step * grad_b;
                if (logistic_loss(x, y, cls, w_next, b_next, l2) <= loss_before || step < 1e-12) {
                    w = std::move(w_next);
                    b = b_next;
                    step *= 1.2; // recover step size gradually
                    break;
                }
                step *= 0.5;
            }
        }
        if (!converged) throw NonConvergence("logistic regression for class " +
                                             std::string(class_name(static_cast<ClassLabel>(cls))));
        for (std::size_t c = 0; c < d; ++c) model.weights(cls, c) = w[c];
        model.biases[cls] = b;
    }
}

} // namespace detail

inline BaselineModel baseline_train(BaselineVariant variant, const LabeledDataset& train,
                                    const BaselineHyperparams& hyperparams, std::uint64_t seed) {
    if (train.empty()) throw TrainingError("empty training data");
    detail::check_multiclass(train.y);

    BaselineModel model;
    model.variant = variant;
    model.hyperparams = hyperparams;
    model.scaler = Scaler::fit(train.X);
    const Matrix x = model.scaler.apply(train.X);

    switch (variant) {
        case BaselineVariant::LinearSvm: detail::train_linear_svm(model, x, train.y, seed); break;
        case BaselineVariant::LogisticRegression: detail::train_logistic(model, x, train.y); break;
        case BaselineVariant::Knn:
            model.train_x = x;
            model.train_y = train.y;
            break;
    }
    return model;
}

inline ClassLabel baseline_predict(const BaselineModel& model, std::span<const double> x_raw) {
    const std::vector<double> x = model.scaler.apply_row(x_raw);

    if (model.variant == BaselineVariant::Knn) {
        const std::size_t n = model.train_x.rows();
        const std::size_t k = std::min(model.hyperparams.knn_k, n);
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i)
            dist[i] = {squared_distance(model.train_x.row(i), x), i};
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                          dist.end());
        std::array<std::size_t, kClassCount> votes{};
        for (std::size_t i = 0; i < k; ++i)
            ++votes[static_cast<std::size_t>(model.train_y[dist[i].second])];
        std::size_t best = 0;
        for (std::size_t c = 1; c < kClassCount; ++c)
            if (votes[c] > votes[best]) best = c;
        return static_cast<ClassLabel>(best);
    }

    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t cls = 0; cls < kClassCount; ++cls) {
        const double score = dot(model.weights.row(cls), x) + model.biases[cls];
        if (score > best_score) {
            best_score = score;
            best = cls;
        }
    }
    return static_cast<ClassLabel>(best);
}

inline ClassLabel baseline_predict(const BaselineModel& model, const FeatureVector& fv) {
    return baseline_predict(model, std::span<const double>(fv.data(), fv.size()));
}

} // namespace floodwatch
