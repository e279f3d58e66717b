#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "floodwatch.hpp"
#include "test_support.hpp"

using namespace floodwatch;
using Catch::Approx;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(0, rows.front().size());
    for (const auto& row : rows) m.push_row(row);
    return m;
}

ConfusionMatrix make_confusion(const std::array<std::array<std::uint64_t, 3>, 3>& counts) {
    ConfusionMatrix cm;
    cm.counts = counts;
    return cm;
}

} // namespace

TEST_CASE("scaler fit and apply") {
    SECTION("constant column passes through centered") {
        const Matrix x = from_rows({{2.0}, {2.0}, {2.0}});
        const Scaler s = Scaler::fit(x);
        CHECK(s.stddev[0] == 0.0);
        const Matrix out = s.apply(x);
        for (std::size_t r = 0; r < 3; ++r) CHECK(out(r, 0) == 0.0);
    }

    SECTION("two-point column") {
        const Matrix x = from_rows({{0.0}, {2.0}});
        const Scaler s = Scaler::fit(x);
        CHECK(s.mean[0] == 1.0);
        CHECK(s.stddev[0] == 1.0);
        const Matrix out = s.apply(x);
        CHECK(out(0, 0) == -1.0);
        CHECK(out(1, 0) == 1.0);
    }

    SECTION("standardized columns recompute to mean 0, stddev 1") {
        const Matrix x = fwtest::gaussian_blob(200, 5, 3.0, 7.0, 11);
        const Matrix out = Scaler::fit(x).apply(x);
        for (std::size_t c = 0; c < 5; ++c) {
            double mean = 0.0;
            for (std::size_t r = 0; r < out.rows(); ++r) mean += out(r, c);
            mean /= static_cast<double>(out.rows());
            CHECK(std::abs(mean) < 1e-9);
            double var = 0.0;
            for (std::size_t r = 0; r < out.rows(); ++r)
                var += (out(r, c) - mean) * (out(r, c) - mean);
            var /= static_cast<double>(out.rows());
            CHECK(std::sqrt(var) == Approx(1.0).epsilon(1e-9));
        }
    }

    SECTION("empty input") {
        CHECK_THROWS_AS(Scaler::fit(Matrix()), EmptyMatrix);
    }
}

TEST_CASE("stratified split") {
    auto make_dataset = [](std::initializer_list<std::pair<ClassLabel, int>> spec) {
        LabeledDataset d;
        d.X = Matrix(0, 2);
        int v = 0;
        for (const auto& [label, count] : spec)
            for (int i = 0; i < count; ++i) {
                const double fv = static_cast<double>(v++);
                d.X.push_row(std::vector<double>{fv, -fv});
                d.y.push_back(label);
            }
        return d;
    };

    SECTION("floor arithmetic on a single class") {
        const auto d = make_dataset({{ClassLabel::Normal, 10}});
        const auto [train, test] = train_test_split(d, 0.6, 1);
        CHECK(train.size() == 6);
        CHECK(test.size() == 4);
    }

    SECTION("same seed, same split") {
        const auto d = make_dataset({{ClassLabel::Normal, 20}, {ClassLabel::SynFlood, 10}});
        const auto [a_train, a_test] = train_test_split(d, 0.7, 42);
        const auto [b_train, b_test] = train_test_split(d, 0.7, 42);
        CHECK(a_train.X == b_train.X);
        CHECK(a_train.y == b_train.y);
        CHECK(a_test.X == b_test.X);
    }

    SECTION("three balanced classes stratify exactly") {
        const auto d = make_dataset({{ClassLabel::Normal, 100},
                                     {ClassLabel::SynFlood, 100},
                                     {ClassLabel::IcmpFlood, 100}});
        const auto [train, test] = train_test_split(d, 0.6, 9);
        std::array<int, 3> counts{};
        for (ClassLabel y : train.y) ++counts[static_cast<std::size_t>(y)];
        CHECK(counts[0] == 60);
        CHECK(counts[1] == 60);
        CHECK(counts[2] == 60);
        CHECK(test.size() == 120);
    }

    SECTION("row sets are disjoint and cover the dataset") {
        const auto d = make_dataset({{ClassLabel::Normal, 37}, {ClassLabel::IcmpFlood, 13}});
        const auto [train, test] = train_test_split(d, 0.55, 3);
        CHECK(train.size() + test.size() == d.size());
        // Feature 0 is a unique row id by construction.
        std::vector<double> ids;
        for (std::size_t r = 0; r < train.X.rows(); ++r) ids.push_back(train.X(r, 0));
        for (std::size_t r = 0; r < test.X.rows(); ++r) ids.push_back(test.X(r, 0));
        std::sort(ids.begin(), ids.end());
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());

        std::array<double, 3> want{}, got{};
        for (ClassLabel y : d.y) want[static_cast<std::size_t>(y)] += 0.55;
        for (ClassLabel y : train.y) got[static_cast<std::size_t>(y)] += 1.0;
        for (std::size_t c = 0; c < 3; ++c)
            if (want[c] > 0) CHECK(std::abs(got[c] - want[c]) <= 1.0);
    }

    SECTION("class with one sample cannot stratify") {
        const auto d = make_dataset({{ClassLabel::Normal, 10}, {ClassLabel::SynFlood, 1}});
        CHECK_THROWS_AS(train_test_split(d, 0.6, 1), ClassTooSmall);
    }

    SECTION("fraction bounds") {
        const auto d = make_dataset({{ClassLabel::Normal, 10}});
        CHECK_THROWS_AS(train_test_split(d, 0.0, 1), InvalidArgument);
        CHECK_THROWS_AS(train_test_split(d, 1.0, 1), InvalidArgument);
    }
}

TEST_CASE("PCA") {
    SECTION("collinear points have one component") {
        Matrix x(0, 2);
        for (int i = 0; i < 20; ++i) {
            const double v = 0.5 * i - 3.0;
            x.push_row(std::vector<double>{v, v});
        }
        const PcaModel model = pca_fit(x, 2);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(model.components(0, 0)) == Approx(inv_sqrt2));
        CHECK(std::abs(model.components(0, 1)) == Approx(inv_sqrt2));
        CHECK(model.components(0, 0) * model.components(0, 1) > 0.0);
        CHECK(model.explained_variance[1] == Approx(0.0).margin(1e-9));
    }

    SECTION("identical rows are degenerate") {
        Matrix x(0, 3);
        for (int i = 0; i < 5; ++i) x.push_row(std::vector<double>{1.0, 2.0, 3.0});
        CHECK_THROWS_AS(pca_fit(x, 2), DegenerateData);
    }

    SECTION("explained variance sums to total column variance") {
        const Matrix x = fwtest::gaussian_blob(50, 21, 0.0, 2.0, 17);
        const PcaModel model = pca_fit(x, 21);

        double total = 0.0;
        const auto means = column_means(x);
        for (std::size_t c = 0; c < x.cols(); ++c) {
            double var = 0.0;
            for (std::size_t r = 0; r < x.rows(); ++r)
                var += (x(r, c) - means[c]) * (x(r, c) - means[c]);
            total += var / static_cast<double>(x.rows() - 1);
        }
        double sum_ev = 0.0;
        for (double ev : model.explained_variance) sum_ev += ev;
        CHECK(sum_ev == Approx(total).epsilon(1e-6));

        SECTION("components are orthonormal") {
            for (std::size_t i = 0; i < model.n_components(); ++i)
                for (std::size_t j = i; j < model.n_components(); ++j) {
                    const double d = dot(model.components.row(i), model.components.row(j));
                    CHECK(d == Approx(i == j ? 1.0 : 0.0).margin(1e-8));
                }
        }

        SECTION("scores are centered per component") {
            const Matrix scores = pca_transform(model, x);
            for (std::size_t c = 0; c < scores.cols(); ++c) {
                double mean = 0.0;
                for (std::size_t r = 0; r < scores.rows(); ++r) mean += scores(r, c);
                mean /= static_cast<double>(scores.rows());
                CHECK(std::abs(mean) < 1e-8);
            }
        }

        SECTION("variance order is non-increasing") {
            for (std::size_t i = 1; i < model.explained_variance.size(); ++i)
                CHECK(model.explained_variance[i] <= model.explained_variance[i - 1] + 1e-12);
        }
    }

    SECTION("k beyond dimension") {
        const Matrix x = fwtest::gaussian_blob(10, 3, 0.0, 1.0, 5);
        CHECK_THROWS_AS(pca_fit(x, 4), InvalidArgument);
    }
}

TEST_CASE("mahalanobis distance") {
    SECTION("zero at the mean") {
        Matrix cov(2, 2);
        cov(0, 0) = 4.0;
        cov(1, 1) = 1.0;
        const std::vector<double> mu = {1.0, 2.0};
        CHECK(mahalanobis(mu, mu, cov) == 0.0);
    }

    SECTION("identity covariance is Euclidean") {
        Matrix eye(3, 3);
        for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
        const std::vector<double> mu = {0.0, 0.0, 0.0};
        const std::vector<double> x = {3.0, 4.0, 12.0};
        CHECK(mahalanobis(x, mu, eye) == Approx(13.0));
    }

    SECTION("diagonal covariance by hand inversion") {
        Matrix cov(2, 2);
        cov(0, 0) = 4.0;
        cov(1, 1) = 1.0;
        const std::vector<double> mu = {0.0, 0.0};
        const std::vector<double> x = {2.0, 3.0};
        // d^2 = 2^2/4 + 3^2/1 = 10
        CHECK(mahalanobis(x, mu, cov) == Approx(std::sqrt(10.0)));
    }

    SECTION("affine change of basis leaves the distance unchanged") {
        Xoshiro256 rng(23);
        const std::size_t d = 3;
        for (int trial = 0; trial < 20; ++trial) {
            Matrix b(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) b(i, j) = rng.normal();
            Matrix cov(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    double s = i == j ? 0.5 : 0.0;
                    for (std::size_t k = 0; k < d; ++k) s += b(i, k) * b(j, k);
                    cov(i, j) = s;
                }
            Matrix a(d, d);
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.normal();
                a(i, i) += 3.0; // keep it comfortably invertible
            }

            std::vector<double> x(d), mu(d);
            for (std::size_t i = 0; i < d; ++i) {
                x[i] = rng.normal();
                mu[i] = rng.normal();
            }

            std::vector<double> ax(d, 0.0), amu(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    ax[i] += a(i, j) * x[j];
                    amu[i] += a(i, j) * mu[j];
                }
            Matrix acat(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < d; ++k)
                        for (std::size_t l = 0; l < d; ++l)
                            s += a(i, k) * cov(k, l) * a(j, l);
                    acat(i, j) = s;
                }

            const double base = mahalanobis(x, mu, cov);
            const double mapped = mahalanobis(ax, amu, acat);
            CHECK(mapped == Approx(base).margin(1e-8));
        }
    }

    SECTION("non-positive-definite covariance is rejected") {
        Matrix cov(2, 2);
        cov(0, 0) = 1.0;
        cov(0, 1) = 2.0;
        cov(1, 0) = 2.0;
        cov(1, 1) = 1.0;
        const std::vector<double> mu = {0.0, 0.0};
        const std::vector<double> x = {1.0, 1.0};
        CHECK_THROWS_AS(mahalanobis(x, mu, cov), NotPositiveDefinite);
    }
}

TEST_CASE("confusion matrix and accuracy reproduce the published table") {
    // Four published 3-class matrices and their accuracies.
    const auto rf = make_confusion({{{626, 7, 0}, {49, 210, 0}, {0, 0, 350}}});
    CHECK(accuracy(rf) == 1186.0 / 1242.0);
    CHECK(std::abs(100.0 * accuracy(rf) - 95.4911) < 1e-4);

    const auto svm = make_confusion({{{622, 11, 0}, {58, 201, 0}, {0, 0, 350}}});
    CHECK(accuracy(svm) == 1173.0 / 1242.0);
    CHECK(std::abs(100.0 * accuracy(svm) - 94.444) < 1e-3);

    const auto knn = make_confusion({{{626, 7, 0}, {52, 207, 0}, {1, 1, 348}}});
    CHECK(accuracy(knn) == 1181.0 / 1242.0);
    CHECK(std::abs(100.0 * accuracy(knn) - 95.088) < 1e-3);

    const auto logreg = make_confusion({{{631, 2, 0}, {177, 82, 0}, {0, 0, 350}}});
    CHECK(accuracy(logreg) == 1063.0 / 1242.0);
    CHECK(std::abs(100.0 * accuracy(logreg) - 85.587) < 1e-3);
}

TEST_CASE("confusion matrix construction") {
    const std::vector<ClassLabel> truth = {ClassLabel::Normal, ClassLabel::SynFlood,
                                           ClassLabel::IcmpFlood, ClassLabel::Normal};
    SECTION("perfect predictions") {
        const ConfusionMatrix cm = confusion_matrix(truth, truth);
        CHECK(accuracy(cm) == 1.0);
        CHECK(cm.counts[0][0] == 2);
        CHECK(cm.counts[1][1] == 1);
        CHECK(cm.counts[2][2] == 1);
        CHECK(cm.total() == truth.size());
    }

    SECTION("off-diagonal placement is row-true, column-predicted") {
        const std::vector<ClassLabel> pred = {ClassLabel::SynFlood, ClassLabel::SynFlood,
                                              ClassLabel::IcmpFlood, ClassLabel::Normal};
        const ConfusionMatrix cm = confusion_matrix(truth, pred);
        CHECK(cm.counts[0][1] == 1);
        CHECK(accuracy(cm) == Approx(0.75));
    }

    SECTION("length mismatch") {
        const std::vector<ClassLabel> shorter = {ClassLabel::Normal};
        CHECK_THROWS_AS(confusion_matrix(truth, shorter), LengthMismatch);
    }
}
