#pragma once

// Test-set evaluation: confusion matrix (rows true, columns predicted, in
// {normal, syn_flood, icmp_flood} order) plus trace/total accuracy, and a
// JSON report collecting one matrix per classifier.

#include <functional>
#include <string>
#include <vector>

#include "floodwatch/csv.hpp"
#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/mlcore.hpp"

#include "json.hpp"

namespace floodwatch {

using PredictFn = std::function<ClassLabel(std::span<const double>)>;

struct EvaluationResult {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
};

inline EvaluationResult evaluate_classifier(const PredictFn& predict, const LabeledDataset& test) {
    if (test.empty()) throw InvalidArgument("empty test set");
    std::vector<ClassLabel> predicted;
    predicted.reserve(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) predicted.push_back(predict(test.X.row(i)));
    EvaluationResult result;
    result.confusion = confusion_matrix(test.y, predicted);
    result.accuracy = accuracy(result.confusion);
    return result;
}

struct NamedEvaluation {
    std::string classifier;
    EvaluationResult result;
};

inline nlohmann::json evaluation_to_json(const EvaluationResult& result) {
    nlohmann::json matrix = nlohmann::json::array();
    for (const auto& row : result.confusion.counts) {
        nlohmann::json json_row = nlohmann::json::array();
        for (std::uint64_t v : row) json_row.push_back(v);
        matrix.push_back(json_row);
    }
    return {{"confusion_matrix", matrix},
            {"accuracy", result.accuracy},
            {"accuracy_percent", result.accuracy * 100.0}};
}

inline std::string evaluation_report(std::span<const NamedEvaluation> evaluations) {
    nlohmann::json doc;
    doc["format"] = "floodwatch-evaluation";
    doc["version"] = 1;
    doc["classes"] = {"normal", "syn_flood", "icmp_flood"};
    nlohmann::json list = nlohmann::json::array();
    for (const NamedEvaluation& e : evaluations) {
        nlohmann::json entry = evaluation_to_json(e.result);
        entry["classifier"] = e.classifier;
        list.push_back(entry);
    }
    doc["results"] = list;
    return doc.dump(2) + "\n";
}

} // namespace floodwatch
