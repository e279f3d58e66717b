#pragma once

// Versioned JSON serialization for trained models. Numbers are dumped at
// full round-trip precision, so a reloaded model reproduces the original's
// predictions bit for bit.

#include <string>
#include <vector>

#include "floodwatch/baselines.hpp"
#include "floodwatch/ensemble.hpp"
#include "floodwatch/errors.hpp"
#include "floodwatch/random_forest.hpp"

#include "json.hpp"

namespace floodwatch {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kModelFormatTag = "floodwatch-model";

namespace detail {

inline nlohmann::json scaler_to_json(const Scaler& s) {
    return {{"mean", s.mean}, {"stddev", s.stddev}};
}

inline Scaler scaler_from_json(const nlohmann::json& j) {
    Scaler s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    if (s.mean.size() != s.stddev.size()) throw ModelFormatError("scaler size mismatch");
    return s;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) throw ModelFormatError("matrix size mismatch");
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
    return m;
}

inline void check_envelope_header(const nlohmann::json& doc, const std::string& expected_kind) {
    if (!doc.is_object() || doc.value("format", "") != kModelFormatTag)
        throw ModelFormatError("not a floodwatch model document");
    if (doc.value("version", -1) != kModelFormatVersion)
        throw ModelFormatError("unsupported model format version");
    if (doc.value("kind", "") != expected_kind)
        throw ModelFormatError("expected a '" + expected_kind + "' model, found '" +
                               doc.value("kind", "?") + "'");
}

} // namespace detail

inline nlohmann::json ensemble_to_json(const AnomalyEnsemble& ens) {
    nlohmann::json doc;
    doc["format"] = kModelFormatTag;
    doc["version"] = kModelFormatVersion;
    doc["kind"] = "anomaly-ensemble";
    doc["config"] = {{"nu", ens.config.nu},
                     {"gamma", ens.config.gamma},
                     {"n_trees", ens.config.n_trees},
                     {"psi", ens.config.psi},
                     {"contamination", ens.config.contamination},
                     {"support_fraction", ens.config.support_fraction},
                     {"seed", ens.config.seed}};

    nlohmann::json trees = nlohmann::json::array();
    for (const IsoTree& tree : ens.iforest.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const IsoTreeNode& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.size});
        trees.push_back(nodes);
    }
    doc["isolation_forest"] = {{"trees", trees},
                               {"n_trees", ens.iforest.n_trees},
                               {"psi", ens.iforest.psi},
                               {"threshold", ens.iforest.threshold},
                               {"scaler", detail::scaler_to_json(ens.iforest.scaler)}};

    doc["ocsvm"] = {{"support_vectors", detail::matrix_to_json(ens.ocsvm.support_vectors)},
                    {"alphas", ens.ocsvm.alphas},
                    {"rho", ens.ocsvm.rho},
                    {"gamma", ens.ocsvm.gamma},
                    {"scaler", detail::scaler_to_json(ens.ocsvm.scaler)}};

    doc["elliptic_envelope"] = {{"location", ens.envelope.location},
                                {"covariance", detail::matrix_to_json(ens.envelope.covariance)},
                                {"dist_threshold", ens.envelope.dist_threshold},
                                {"scaler", detail::scaler_to_json(ens.envelope.scaler)},
                                {"cstep_monotone", ens.envelope.cstep_monotone}};
    return doc;
}

inline AnomalyEnsemble ensemble_from_json(const nlohmann::json& doc) {
    detail::check_envelope_header(doc, "anomaly-ensemble");
    AnomalyEnsemble ens;

    const auto& jc = doc.at("config");
    ens.config.nu = jc.at("nu").get<double>();
    ens.config.gamma = jc.at("gamma").get<double>();
    ens.config.n_trees = jc.at("n_trees").get<std::size_t>();
    ens.config.psi = jc.at("psi").get<std::size_t>();
    ens.config.contamination = jc.at("contamination").get<double>();
    ens.config.support_fraction = jc.at("support_fraction").get<double>();
    ens.config.seed = jc.at("seed").get<std::uint64_t>();

    const auto& jf = doc.at("isolation_forest");
    ens.iforest.n_trees = jf.at("n_trees").get<std::size_t>();
    ens.iforest.psi = jf.at("psi").get<std::size_t>();
    ens.iforest.threshold = jf.at("threshold").get<double>();
    ens.iforest.scaler = detail::scaler_from_json(jf.at("scaler"));
    for (const auto& jtree : jf.at("trees")) {
        IsoTree tree;
        for (const auto& jn : jtree) {
            IsoTreeNode n;
            n.feature = jn.at(0).get<std::int32_t>();
            n.threshold = jn.at(1).get<double>();
            n.left = jn.at(2).get<std::int32_t>();
            n.right = jn.at(3).get<std::int32_t>();
            n.size = jn.at(4).get<std::uint32_t>();
            tree.nodes.push_back(n);
        }
        ens.iforest.trees.push_back(std::move(tree));
    }

    const auto& js = doc.at("ocsvm");
    ens.ocsvm.support_vectors = detail::matrix_from_json(js.at("support_vectors"));
    ens.ocsvm.alphas = js.at("alphas").get<std::vector<double>>();
    ens.ocsvm.rho = js.at("rho").get<double>();
    ens.ocsvm.gamma = js.at("gamma").get<double>();
    ens.ocsvm.scaler = detail::scaler_from_json(js.at("scaler"));

    const auto& je = doc.at("elliptic_envelope");
    ens.envelope.location = je.at("location").get<std::vector<double>>();
    ens.envelope.covariance = detail::matrix_from_json(je.at("covariance"));
    ens.envelope.dist_threshold = je.at("dist_threshold").get<double>();
    ens.envelope.scaler = detail::scaler_from_json(je.at("scaler"));
    ens.envelope.cstep_monotone = je.value("cstep_monotone", true);
    return ens;
}

inline nlohmann::json forest_to_json(const RandomForestModel& model) {
    nlohmann::json doc;
    doc["format"] = kModelFormatTag;
    doc["version"] = kModelFormatVersion;
    doc["kind"] = "random-forest";
    doc["config"] = {{"n_trees", model.config.n_trees},
                     {"max_features", model.config.max_features},
                     {"max_depth", model.config.max_depth},
                     {"min_leaf", model.config.min_leaf},
                     {"seed", model.config.seed}};
    doc["scaler"] = detail::scaler_to_json(model.scaler);
    doc["oob_available"] = model.oob_available;
    doc["oob_accuracy"] = model.oob_accuracy;

    nlohmann::json trees = nlohmann::json::array();
    for (const DecisionTree& tree : model.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right,
                             std::vector<std::uint64_t>(n.histogram.begin(), n.histogram.end())});
        nlohmann::json jt;
        jt["nodes"] = nodes;
        jt["impurity_decrease"] = std::vector<double>(tree.impurity_decrease.begin(),
                                                      tree.impurity_decrease.end());
        trees.push_back(jt);
    }
    doc["trees"] = trees;
    return doc;
}

inline RandomForestModel forest_from_json(const nlohmann::json& doc) {
    detail::check_envelope_header(doc, "random-forest");
    RandomForestModel model;
    const auto& jc = doc.at("config");
    model.config.n_trees = jc.at("n_trees").get<std::size_t>();
    model.config.max_features = jc.at("max_features").get<std::size_t>();
    model.config.max_depth = jc.at("max_depth").get<std::size_t>();
    model.config.min_leaf = jc.at("min_leaf").get<std::size_t>();
    model.config.seed = jc.at("seed").get<std::uint64_t>();
    model.scaler = detail::scaler_from_json(doc.at("scaler"));
    model.oob_available = doc.value("oob_available", false);
    model.oob_accuracy = doc.value("oob_accuracy", 0.0);

    for (const auto& jt : doc.at("trees")) {
        DecisionTree tree;
        for (const auto& jn : jt.at("nodes")) {
            TreeNode n;
            n.feature = jn.at(0).get<std::int32_t>();
            n.threshold = jn.at(1).get<double>();
            n.left = jn.at(2).get<std::int32_t>();
            n.right = jn.at(3).get<std::int32_t>();
            const auto hist = jn.at(4).get<std::vector<std::uint64_t>>();
            if (hist.size() != kClassCount) throw ModelFormatError("bad histogram width");
            std::copy(hist.begin(), hist.end(), n.histogram.begin());
            tree.nodes.push_back(n);
        }
        const auto imp = jt.at("impurity_decrease").get<std::vector<double>>();
        if (imp.size() != kFeatureCount) throw ModelFormatError("bad importance width");
        std::copy(imp.begin(), imp.end(), tree.impurity_decrease.begin());
        model.trees.push_back(std::move(tree));
    }
    return model;
}

inline nlohmann::json baseline_to_json(const BaselineModel& model) {
    nlohmann::json doc;
    doc["format"] = kModelFormatTag;
    doc["version"] = kModelFormatVersion;
    doc["kind"] = "baseline";
    doc["variant"] = std::string(baseline_name(model.variant));
    doc["hyperparams"] = {{"svm_lambda", model.hyperparams.svm_lambda},
                          {"svm_epochs", model.hyperparams.svm_epochs},
                          {"logreg_l2", model.hyperparams.logreg_l2},
                          {"logreg_tolerance", model.hyperparams.logreg_tolerance},
                          {"logreg_max_iters", model.hyperparams.logreg_max_iters},
                          {"knn_k", model.hyperparams.knn_k}};
    doc["scaler"] = detail::scaler_to_json(model.scaler);
    doc["weights"] = detail::matrix_to_json(model.weights);
    doc["biases"] = model.biases;
    doc["train_x"] = detail::matrix_to_json(model.train_x);
    std::vector<int> labels;
    labels.reserve(model.train_y.size());
    for (ClassLabel y : model.train_y) labels.push_back(static_cast<int>(y));
    doc["train_y"] = labels;
    return doc;
}

inline BaselineModel baseline_from_json(const nlohmann::json& doc) {
    detail::check_envelope_header(doc, "baseline");
    BaselineModel model;
    const std::string variant = doc.at("variant").get<std::string>();
    if (variant == "linear_svm")
        model.variant = BaselineVariant::LinearSvm;
    else if (variant == "logistic_regression")
        model.variant = BaselineVariant::LogisticRegression;
    else if (variant == "knn")
        model.variant = BaselineVariant::Knn;
    else
        throw ModelFormatError("unknown baseline variant: " + variant);

    const auto& jh = doc.at("hyperparams");
    model.hyperparams.svm_lambda = jh.at("svm_lambda").get<double>();
    model.hyperparams.svm_epochs = jh.at("svm_epochs").get<std::size_t>();
    model.hyperparams.logreg_l2 = jh.at("logreg_l2").get<double>();
    model.hyperparams.logreg_tolerance = jh.at("logreg_tolerance").get<double>();
    model.hyperparams.logreg_max_iters = jh.at("logreg_max_iters").get<std::size_t>();
    model.hyperparams.knn_k = jh.at("knn_k").get<std::size_t>();
    model.scaler = detail::scaler_from_json(doc.at("scaler"));
    model.weights = detail::matrix_from_json(doc.at("weights"));
    model.biases = doc.at("biases").get<std::vector<double>>();
    model.train_x = detail::matrix_from_json(doc.at("train_x"));
    for (int code : doc.at("train_y").get<std::vector<int>>())
        model.train_y.push_back(class_from_code(code));
    return model;
}

inline nlohmann::json parse_model_document(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ModelFormatError("model file is not valid JSON");
    return doc;
}

} // namespace floodwatch
