#pragma once

// Shared numerics for the detectors and classifiers: standardization,
// stratified train/test split, PCA, Mahalanobis distance, and the
// confusion-matrix/accuracy evaluation primitives.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/rng.hpp"

namespace floodwatch {

// Column-wise standardizer. Constant columns keep stddev 0 and pass
// through unscaled (centered only) at apply time.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool operator==(const Scaler&) const = default;

    static Scaler fit(const Matrix& x) {
        if (x.rows() == 0 || x.cols() == 0) throw EmptyMatrix("cannot fit scaler on empty matrix");
        Scaler s;
        s.mean = column_means(x);
        s.stddev.assign(x.cols(), 0.0);
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double d = x(r, c) - s.mean[c];
                s.stddev[c] += d * d;
            }
        for (double& v : s.stddev) v = std::sqrt(v / static_cast<double>(x.rows()));
        return s;
    }

    std::vector<double> apply_row(std::span<const double> row) const {
        std::vector<double> out(row.size());
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double s = stddev[c] > 0.0 ? stddev[c] : 1.0;
            out[c] = (row[c] - mean[c]) / s;
        }
        return out;
    }

    Matrix apply(const Matrix& x) const {
        Matrix out(x.rows(), x.cols());
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const auto row = apply_row(x.row(r));
            for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = row[c];
        }
        return out;
    }
};

// Stratified split: per class, floor(fraction * n_class) rows go to the
// train half after a seeded shuffle. Row order within each half follows
// the input dataset.
inline std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& dataset,
                                                                  double train_fraction,
                                                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw InvalidArgument("train_fraction must be in (0, 1)");
    if (dataset.empty()) throw InvalidArgument("cannot split an empty dataset");

    std::array<std::vector<std::size_t>, 3> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        by_class[static_cast<std::size_t>(dataset.y[i])].push_back(i);

    Xoshiro256 rng(derive_seed(seed, 0));
    std::vector<bool> in_train(dataset.size(), false);
    for (auto& indices : by_class) {
        if (indices.empty()) continue;
        if (indices.size() < 2)
            throw ClassTooSmall("a class with fewer than 2 samples cannot be stratified");
        shuffle(indices, rng);
        // +1e-9 counters representation error in fraction * n (0.6 * 100
        // must floor to 60, not 59).
        const auto n_train = static_cast<std::size_t>(
            std::floor(train_fraction * static_cast<double>(indices.size()) + 1e-9));
        for (std::size_t k = 0; k < n_train; ++k) in_train[indices[k]] = true;
    }

    LabeledDataset train, test;
    train.X = Matrix(0, dataset.X.cols());
    test.X = Matrix(0, dataset.X.cols());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        LabeledDataset& half = in_train[i] ? train : test;
        half.X.push_row(dataset.X.row(i));
        half.y.push_back(dataset.y[i]);
    }
    return {std::move(train), std::move(test)};
}

struct PcaModel {
    std::vector<double> mean;
    Matrix components;                      // k x d, orthonormal rows
    std::vector<double> explained_variance; // descending

    std::size_t n_components() const { return components.rows(); }
};

// Top-k eigenvectors of the sample covariance (divisor n-1), via Jacobi.
// Component signs are fixed so the largest-magnitude entry is positive.
inline PcaModel pca_fit(const Matrix& x, std::size_t k) {
    if (x.rows() < 2) throw InvalidArgument("PCA needs at least 2 rows");
    if (k > x.cols()) throw InvalidArgument("k exceeds the feature dimension");

    bool all_identical = true;
    for (std::size_t r = 1; r < x.rows() && all_identical; ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
            if (x(r, c) != x(0, c)) {
                all_identical = false;
                break;
            }
    if (all_identical) throw DegenerateData("all rows identical");

    PcaModel model;
    model.mean = column_means(x);
    const Matrix cov = covariance_about(x, model.mean, static_cast<double>(x.rows() - 1));
    const SymmetricEigen eig = jacobi_eigen_symmetric(cov);

    model.components = Matrix(k, x.cols());
    model.explained_variance.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        model.explained_variance[i] = std::max(eig.values[i], 0.0);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < x.cols(); ++c)
            if (std::abs(eig.vectors(i, c)) > std::abs(eig.vectors(i, arg))) arg = c;
        const double sign = eig.vectors(i, arg) < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < x.cols(); ++c)
            model.components(i, c) = sign * eig.vectors(i, c);
    }
    return model;
}

inline Matrix pca_transform(const PcaModel& model, const Matrix& x) {
    Matrix scores(x.rows(), model.n_components());
    std::vector<double> centered(x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) centered[c] = x(r, c) - model.mean[c];
        for (std::size_t i = 0; i < model.n_components(); ++i)
            scores(r, i) = dot(centered, model.components.row(i));
    }
    return scores;
}

// sqrt((x - mu)^T C^-1 (x - mu)) through the Cholesky factor of C; no
// explicit inverse is ever formed.
inline double mahalanobis(std::span<const double> x, std::span<const double> mean,
                          const Matrix& cov) {
    if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size())
        throw LengthMismatch("mahalanobis dimension mismatch");
    const Matrix l = cholesky(cov);
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - mean[i];
    const std::vector<double> z = forward_substitute(l, diff);
    return std::sqrt(dot(z, z));
}

// Mahalanobis reusing a precomputed Cholesky factor.
inline double mahalanobis_with_factor(std::span<const double> x, std::span<const double> mean,
                                      const Matrix& chol_lower) {
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - mean[i];
    const std::vector<double> z = forward_substitute(chol_lower, diff);
    return std::sqrt(dot(z, z));
}

inline constexpr std::size_t kClassCount = 3;

// Rows are true classes, columns predictions, both in {normal, syn_flood,
// icmp_flood} order.
struct ConfusionMatrix {
    std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts{};

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto& row : counts)
            for (std::uint64_t v : row) t += v;
        return t;
    }

    std::uint64_t trace() const {
        std::uint64_t t = 0;
        for (std::size_t i = 0; i < kClassCount; ++i) t += counts[i][i];
        return t;
    }
};

inline ConfusionMatrix confusion_matrix(std::span<const ClassLabel> y_true,
                                        std::span<const ClassLabel> y_pred) {
    if (y_true.size() != y_pred.size()) throw LengthMismatch("label list sizes differ");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i)
        ++cm.counts[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
    return cm;
}

// Multiclass generalization of (TP+TN)/(TP+TN+FP+FN): trace over total.
inline double accuracy(const ConfusionMatrix& cm) {
    const std::uint64_t total = cm.total();
    if (total == 0) throw InvalidArgument("empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

} // namespace floodwatch
