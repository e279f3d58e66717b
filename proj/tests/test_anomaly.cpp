#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "floodwatch.hpp"
#include "test_support.hpp"

using namespace floodwatch;
using Catch::Approx;

namespace {

// Test-side path-length computation, independent of IsoTree::path_length.
double oracle_path_length(const IsoTree& tree, std::span<const double> x) {
    double euler = 0.5772156649;
    auto c = [&](double n) {
        if (n < 2.0) return 0.0;
        return 2.0 * (std::log(n - 1.0) + euler) - 2.0 * (n - 1.0) / n;
    };
    std::int32_t idx = 0;
    double edges = 0.0;
    while (tree.nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const auto& node = tree.nodes[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
        edges += 1.0;
    }
    return edges + c(static_cast<double>(tree.nodes[static_cast<std::size_t>(idx)].size));
}

// Brute-force projection onto {0 <= a <= C, sum a = 1} by bisection on the
// simplex multiplier.
std::vector<double> project_box_simplex(std::vector<double> v, double upper) {
    double lo = *std::min_element(v.begin(), v.end()) - upper - 1.0;
    double hi = *std::max_element(v.begin(), v.end()) + 1.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double tau = 0.5 * (lo + hi);
        double sum = 0.0;
        for (double vi : v) sum += std::clamp(vi - tau, 0.0, upper);
        if (sum > 1.0)
            lo = tau;
        else
            hi = tau;
    }
    const double tau = 0.5 * (lo + hi);
    for (double& vi : v) vi = std::clamp(vi - tau, 0.0, upper);
    return v;
}

LabeledDataset dataset_from_matrix(const Matrix& x) {
    LabeledDataset d;
    d.X = x;
    d.y.assign(x.rows(), ClassLabel::Normal);
    return d;
}

} // namespace

TEST_CASE("c_factor matches the documented approximation") {
    CHECK(c_factor(2) == Approx(0.1544313298).margin(1e-10));
    CHECK(c_factor(256) ==
          Approx(2.0 * (std::log(255.0) + 0.5772156649) - 2.0 * 255.0 / 256.0).margin(1e-12));
    CHECK(c_factor(256) == Approx(10.2448).margin(1e-4));
    CHECK(c_factor(1) == 0.0);
    CHECK(c_factor(0) == 0.0);
}

TEST_CASE("two-point isolation tree isolates both at depth 1") {
    Matrix x(0, 1);
    x.push_row(std::vector<double>{0.0});
    x.push_row(std::vector<double>{10.0});
    const IsoForestModel model = iforest_train(x, 1, 2, 0.0, 5);

    const auto x_std = model.scaler.apply(x);
    CHECK(model.trees.size() == 1);
    CHECK(model.trees[0].path_length(x_std.row(0)) == 1.0); // 1 edge + c(1) = 1
    CHECK(model.trees[0].path_length(x_std.row(1)) == 1.0);
}

TEST_CASE("score is exactly 0.5 when the mean path equals c(psi)") {
    // All-identical rows make every tree a single size-psi leaf, so any
    // query walks 0 edges and picks up exactly c(psi).
    Matrix x(0, 2);
    for (int i = 0; i < 8; ++i) x.push_row(std::vector<double>{3.0, -1.0});
    const IsoForestModel model = iforest_train(x, 3, 8, 0.0, 1);
    const std::vector<double> probe = {0.0, 0.0};
    CHECK(iforest_score(model, probe) == 0.5);
}

TEST_CASE("scores stay in (0, 1] and fall as paths lengthen") {
    const Matrix x = fwtest::gaussian_blob(300, 4, 0.0, 1.0, 3);
    const IsoForestModel model = iforest_train(x, 50, 128, 0.02, 9);

    Xoshiro256 rng(31);
    double prev_path = -1.0, prev_score = 2.0;
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> probe(4);
        for (double& v : probe) v = rng.normal(0.0, 3.0);
        const auto std_probe = model.scaler.apply_row(probe);
        double mean_path = 0.0;
        for (const auto& tree : model.trees) mean_path += oracle_path_length(tree, std_probe);
        mean_path /= static_cast<double>(model.trees.size());
        const double score = iforest_score(model, probe);
        CHECK(score > 0.0);
        CHECK(score <= 1.0);
        samples.emplace_back(mean_path, score);
    }
    std::sort(samples.begin(), samples.end());
    for (const auto& [path, score] : samples) {
        if (prev_path >= 0.0 && path > prev_path + 1e-12) CHECK(score < prev_score);
        prev_path = path;
        prev_score = score;
    }
}

TEST_CASE("a gross outlier gets the top isolation score") {
    Matrix x = fwtest::gaussian_blob(500, 3, 0.0, 1.0, 8);
    x.push_row(std::vector<double>{40.0, -35.0, 50.0});
    const IsoForestModel model = iforest_train(x, 100, 256, 0.02, 4);

    double outlier_score = iforest_score(model, x.row(500));
    for (std::size_t i = 0; i < 500; ++i)
        CHECK(iforest_score(model, x.row(i)) <= outlier_score);
    CHECK(iforest_predict(model, x.row(500)) == -1);
}

TEST_CASE("isolation threshold is a training-score quantile") {
    const Matrix x = fwtest::gaussian_blob(500, 5, 0.0, 1.0, 16);
    const IsoForestModel model = iforest_train(x, 100, 256, 0.02, 5);
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (iforest_predict(model, x.row(i)) == -1) ++flagged;
    CHECK(flagged >= 9);
    CHECK(flagged <= 11);
}

TEST_CASE("iforest scores match a brute-force recomputation") {
    const Matrix x = fwtest::gaussian_blob(10, 3, 0.0, 2.0, 77);
    const IsoForestModel model = iforest_train(x, 2, 10, 0.1, 13);
    REQUIRE(model.trees.size() == 2);

    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto x_std = model.scaler.apply_row(x.row(i));
        double mean_path = 0.0;
        for (const auto& tree : model.trees) mean_path += oracle_path_length(tree, x_std);
        mean_path /= 2.0;
        const double expected = std::exp2(-mean_path / c_factor(model.psi));
        CHECK(iforest_score(model, x.row(i)) == Approx(expected).margin(1e-12));
    }
}

TEST_CASE("iforest training is deterministic per seed") {
    const Matrix x = fwtest::gaussian_blob(200, 4, 1.0, 2.0, 6);
    const IsoForestModel a = iforest_train(x, 20, 64, 0.02, 99);
    const IsoForestModel b = iforest_train(x, 20, 64, 0.02, 99);
    for (std::size_t i = 0; i < x.rows(); ++i)
        CHECK(iforest_score(a, x.row(i)) == iforest_score(b, x.row(i)));
    CHECK(a.threshold == b.threshold);
}

TEST_CASE("one-class SVM holds the nu property") {
    const Matrix x = fwtest::gaussian_blob(500, 5, 0.0, 1.0, 42);
    const OcsvmModel model = ocsvm_train(x, 0.1, 1.0 / 5.0);

    double alpha_sum = 0.0;
    for (double a : model.alphas) {
        alpha_sum += a;
        CHECK(a > 0.0);
        CHECK(a <= 1.0 / (0.1 * 500.0) + 1e-12);
    }
    CHECK(alpha_sum == Approx(1.0).margin(1e-9));

    std::size_t flagged = 0;
    for (std::size_t i = 0; i < x.rows(); ++i)
        if (ocsvm_predict(model, x.row(i)) == -1) ++flagged;
    const double fraction = static_cast<double>(flagged) / 500.0;
    CHECK(std::abs(fraction - 0.1) <= 0.05);
}

TEST_CASE("identical-point training ends with +1 decisions") {
    Matrix x(0, 2);
    x.push_row(std::vector<double>{1.0, 1.0});
    x.push_row(std::vector<double>{1.0, 1.0});
    try {
        const OcsvmModel model = ocsvm_train(x, 0.5, 0.5);
        CHECK(ocsvm_predict(model, x.row(0)) == +1);
        CHECK(ocsvm_decision(model, x.row(0)) == Approx(0.0).margin(1e-9));
    } catch (const DegenerateGram&) {
        SUCCEED("degenerate Gram refusal is the other allowed outcome");
    }
}

TEST_CASE("far-away points are rejected with positive rho") {
    const Matrix x = fwtest::gaussian_blob(60, 4, 0.0, 1.0, 10);
    const OcsvmModel model = ocsvm_train(x, 0.05, 0.25);
    CHECK(model.rho > 0.0);

    std::vector<double> far(4, 0.0);
    for (std::size_t c = 0; c < 4; ++c) far[c] = model.scaler.mean[c] + 100.0;
    CHECK(ocsvm_predict(model, far) == -1);
    CHECK(ocsvm_decision(model, far) == Approx(-model.rho).margin(1e-6));
}

TEST_CASE("prediction at the heaviest support vector matches its stored decision") {
    const Matrix x = fwtest::gaussian_blob(80, 3, 0.0, 1.0, 55);
    const OcsvmModel model = ocsvm_train(x, 0.1, 1.0 / 3.0);

    std::size_t heaviest = 0;
    for (std::size_t i = 1; i < model.alphas.size(); ++i)
        if (model.alphas[i] > model.alphas[heaviest]) heaviest = i;

    // Recompute the decision from the stored parameters alone.
    double stored = -model.rho;
    for (std::size_t j = 0; j < model.alphas.size(); ++j)
        stored += model.alphas[j] * rbf_kernel(model.support_vectors.row(heaviest),
                                               model.support_vectors.row(j), model.gamma);
    const int expected_sign = stored < 0.0 ? -1 : +1;
    CHECK(ocsvm_decision_standardized(model, model.support_vectors.row(heaviest)) ==
          Approx(stored).margin(1e-12));

    // A bound support vector sits on or inside the outlier side; its
    // prediction must agree with the KKT role the solver assigned it.
    const auto x_std = model.scaler.apply(x);
    for (std::size_t i = 0; i < x_std.rows(); ++i) {
        if (x_std.row(i).size() == model.support_vectors.row(heaviest).size() &&
            std::equal(x_std.row(i).begin(), x_std.row(i).end(),
                       model.support_vectors.row(heaviest).begin())) {
            CHECK(ocsvm_predict(model, x.row(i)) == expected_sign);
        }
    }
}

TEST_CASE("SMO solution matches a projected-gradient QP oracle") {
    const std::size_t n = 12;
    const double nu = 0.5;
    const double gamma = 0.5;
    const Matrix x = fwtest::gaussian_blob(n, 2, 0.0, 1.0, 2024);
    const OcsvmModel model = ocsvm_train(x, nu, gamma, 1e-6);

    // Oracle on the same standardized instance.
    const Scaler scaler = Scaler::fit(x);
    const Matrix xs = scaler.apply(x);
    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram(i, j) = rbf_kernel(xs.row(i), xs.row(j), gamma);

    const double upper = 1.0 / (nu * static_cast<double>(n));
    std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
    const double step = 1.0 / static_cast<double>(n);
    for (int iter = 0; iter < 200000; ++iter) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            double g = 0.0;
            for (std::size_t j = 0; j < n; ++j) g += gram(i, j) * alpha[j];
            v[i] = alpha[i] - step * g;
        }
        alpha = project_box_simplex(std::move(v), upper);
    }

    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) grad[i] += gram(i, j) * alpha[j];
    double rho = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 1e-6 && alpha[i] < upper - 1e-6) {
            rho += grad[i];
            ++free_count;
        }
    REQUIRE(free_count > 0);
    rho /= static_cast<double>(free_count);

    for (std::size_t i = 0; i < n; ++i) {
        double oracle_decision = -rho;
        for (std::size_t j = 0; j < n; ++j)
            oracle_decision += alpha[j] * gram(i, j);
        CHECK(ocsvm_decision(model, x.row(i)) == Approx(oracle_decision).margin(1e-3));
    }
}

TEST_CASE("ocsvm input validation") {
    const Matrix x = fwtest::gaussian_blob(20, 2, 0.0, 1.0, 1);
    CHECK_THROWS_AS(ocsvm_train(x, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(ocsvm_train(x, 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(ocsvm_train(x, 0.5, 0.0), InvalidArgument);
    Matrix one(0, 2);
    one.push_row(std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(ocsvm_train(one, 0.5, 1.0), TooFewSamples);
}

TEST_CASE("full-support MCD is the classical estimate") {
    const Matrix x = fwtest::gaussian_blob(100, 3, 5.0, 2.0, 31);
    const McdResult result = mcd_fit(x, 1.0, 12);

    const auto means = column_means(x);
    for (std::size_t c = 0; c < 3; ++c) CHECK(result.location[c] == Approx(means[c]).margin(1e-12));

    const Matrix cov = covariance_about(x, means, static_cast<double>(x.rows()));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            if (i == j)
                CHECK(result.covariance(i, j) == Approx(cov(i, j)).epsilon(1e-5));
            else
                CHECK(result.covariance(i, j) == Approx(cov(i, j)).margin(1e-9));
        }
    CHECK(result.cstep_monotone);
}

TEST_CASE("MCD shrugs off gross contamination that drags the classical mean") {
    Matrix x = fwtest::gaussian_blob(200, 2, 0.0, 1.0, 64);
    for (int i = 0; i < 20; ++i) x.push_row(std::vector<double>{50.0, 50.0});

    const auto classical = column_means(x);
    CHECK(classical[0] > 4.0); // the outliers pull the mean far from the origin
    CHECK(classical[1] > 4.0);

    const McdResult robust = mcd_fit(x, 0.5, 3);
    CHECK(std::abs(robust.location[0]) < 0.5);
    CHECK(std::abs(robust.location[1]) < 0.5);
    CHECK(robust.cstep_monotone);
    CHECK(robust.csteps > 0);
}

TEST_CASE("MCD preconditions") {
    const Matrix x = fwtest::gaussian_blob(10, 9, 0.0, 1.0, 2);
    CHECK_THROWS_AS(mcd_fit(x, 0.9, 1), TooFewSamples);
    const Matrix ok = fwtest::gaussian_blob(50, 3, 0.0, 1.0, 2);
    CHECK_THROWS_AS(mcd_fit(ok, 0.05, 1), TooFewSamples); // h < d + 1
}

TEST_CASE("envelope basics") {
    const Matrix x = fwtest::gaussian_blob(500, 4, 0.0, 1.0, 21);
    const EnvelopeModel model = envelope_train(x, 0.02, 0.75, 7);

    SECTION("the location itself is an inlier") {
        // Location is in standardized space; map it back through the scaler.
        std::vector<double> raw(4);
        for (std::size_t c = 0; c < 4; ++c)
            raw[c] = model.location[c] * (model.scaler.stddev[c] > 0.0 ? model.scaler.stddev[c]
                                                                       : 1.0) +
                     model.scaler.mean[c];
        CHECK(envelope_predict(model, raw) == +1);
        CHECK(envelope_distance(model, raw) == Approx(0.0).margin(1e-9));
    }

    SECTION("contamination quantile flags about 10 of 500") {
        std::size_t flagged = 0;
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (envelope_predict(model, x.row(i)) == -1) ++flagged;
        CHECK(flagged >= 9);
        CHECK(flagged <= 11);
    }

    SECTION("gross outlier is rejected") {
        const std::vector<double> far = {30.0, -30.0, 25.0, -25.0};
        CHECK(envelope_predict(model, far) == -1);
    }
}

TEST_CASE("envelope decisions are invariant to an exact feature rescaling") {
    const Matrix x = fwtest::gaussian_blob(150, 3, 1.0, 2.0, 44);
    Matrix scaled(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) scaled(r, c) = 4.0 * x(r, c);

    const EnvelopeModel base = envelope_train(x, 0.05, 0.75, 17);
    const EnvelopeModel rescaled = envelope_train(scaled, 0.05, 0.75, 17);

    Xoshiro256 rng(3);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> probe(3), probe4(3);
        for (std::size_t c = 0; c < 3; ++c) {
            probe[c] = rng.normal(1.0, 4.0);
            probe4[c] = 4.0 * probe[c];
        }
        CHECK(envelope_predict(base, probe) == envelope_predict(rescaled, probe4));
    }
}

TEST_CASE("ensemble guards its training contract") {
    LabeledDataset clean = dataset_from_matrix(fwtest::gaussian_blob(60, 21, 0.0, 1.0, 5));

    SECTION("a single attack row poisons the set") {
        LabeledDataset poisoned = clean;
        poisoned.y[3] = ClassLabel::SynFlood;
        CHECK_THROWS_AS(ensemble_train(poisoned, EnsembleConfig{}), ContaminatedTrainingSet);
    }

    SECTION("too few rows") {
        LabeledDataset small = dataset_from_matrix(fwtest::gaussian_blob(30, 21, 0.0, 1.0, 5));
        CHECK_THROWS_AS(ensemble_train(small, EnsembleConfig{}), TooFewSamples);
    }

    SECTION("same data and seed give identical ensembles") {
        EnsembleConfig config;
        config.seed = 77;
        const AnomalyEnsemble a = ensemble_train(clean, config);
        const AnomalyEnsemble b = ensemble_train(clean, config);
        Xoshiro256 rng(6);
        for (int i = 0; i < 50; ++i) {
            FeatureVector probe{};
            for (double& v : probe) v = rng.normal(0.0, 2.0);
            const Verdict va = ensemble_predict(a, probe);
            const Verdict vb = ensemble_predict(b, probe);
            CHECK(va.p_sum == vb.p_sum);
            CHECK(va.iforest_score == vb.iforest_score);
            CHECK(va.ocsvm_decision == vb.ocsvm_decision);
            CHECK(va.envelope_distance == vb.envelope_distance);
        }
        CHECK(ensemble_to_json(a) == ensemble_to_json(b));
    }
}

TEST_CASE("majority vote truth table") {
    for (int p1 : {-1, +1})
        for (int p2 : {-1, +1})
            for (int p3 : {-1, +1}) {
                const Verdict v = combine_votes(p1, p2, p3);
                CHECK(v.p_sum == p1 + p2 + p3);
                CHECK(v.p_sum % 2 != 0);
                CHECK(v.is_anomaly == (v.p_sum < 0));
                const int negatives = (p1 < 0) + (p2 < 0) + (p3 < 0);
                CHECK(v.is_anomaly == (negatives >= 2));
            }
}

TEST_CASE("ensemble flags flood windows after benign-only training") {
    const Ipv4 dev(10, 0, 0, 5), srv(198, 51, 100, 10), atk(10, 0, 0, 66);
    BenignProfile profile;
    profile.device_ip = dev;
    profile.server_ip = srv;
    profile.rate = 40.0;

    const auto records = gen_benign(profile, 80.0, 404);
    const auto windows = windowize(records, dev, 1.0);
    REQUIRE(windows.size() >= 60);

    LabeledDataset clean;
    clean.X = Matrix(0, kFeatureCount);
    for (const auto& w : windows) clean.push(extract_features(w), ClassLabel::Normal);

    EnsembleConfig config;
    config.seed = 9;
    const AnomalyEnsemble ensemble = ensemble_train(clean, config);

    FloodProfile flood;
    flood.attacker_ip = atk;
    flood.target_ip = dev;
    flood.kind = FloodKind::Syn;
    flood.rate = 1500.0;
    flood.start = 0.0;
    flood.duration = 1.0;
    FlowWindow flood_window;
    flood_window.device_ip = dev;
    flood_window.start_time = 0.0;
    flood_window.end_time = 1.0;
    flood_window.packets = gen_flood(flood, 11);

    const Verdict verdict = ensemble_predict(ensemble, extract_features(flood_window));
    CHECK(verdict.is_anomaly);
    CHECK(verdict.p_sum == -3);
}

TEST_CASE("ensemble serialization reproduces predictions exactly") {
    LabeledDataset clean = dataset_from_matrix(fwtest::gaussian_blob(80, 21, 0.0, 1.5, 12));
    EnsembleConfig config;
    config.seed = 31;
    const AnomalyEnsemble original = ensemble_train(clean, config);

    const std::string text = ensemble_to_json(original).dump();
    const AnomalyEnsemble loaded = ensemble_from_json(parse_model_document(text));

    Xoshiro256 rng(90);
    for (int i = 0; i < 100; ++i) {
        FeatureVector probe{};
        for (double& v : probe) v = rng.normal(0.0, 3.0);
        const Verdict a = ensemble_predict(original, probe);
        const Verdict b = ensemble_predict(loaded, probe);
        CHECK(a.p1 == b.p1);
        CHECK(a.p2 == b.p2);
        CHECK(a.p3 == b.p3);
        CHECK(a.iforest_score == b.iforest_score);
        CHECK(a.ocsvm_decision == b.ocsvm_decision);
        CHECK(a.envelope_distance == b.envelope_distance);
    }

    SECTION("format guards") {
        CHECK_THROWS_AS(ensemble_from_json(nlohmann::json{{"format", "bogus"}}),
                        ModelFormatError);
        nlohmann::json wrong_version = ensemble_to_json(original);
        wrong_version["version"] = 99;
        CHECK_THROWS_AS(ensemble_from_json(wrong_version), ModelFormatError);
    }
}
