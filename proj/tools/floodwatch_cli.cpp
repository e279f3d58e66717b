// floodwatch command-line front end.
//
// Subcommands: generate, extract, train-anomaly, train-attack, detect,
// evaluate, pca-plotdata, rules. Exit codes: 0 success, 1 I/O or format
// error, 2 usage or configuration error, 3 training failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "floodwatch.hpp"

#include "CLI11.hpp"

namespace fw = floodwatch;

namespace {

struct GenerateArgs {
    std::string spec_path;
    std::string out_pcap;
    std::string out_truth;
};

int cmd_generate(const GenerateArgs& args) {
    const fw::Config cfg = fw::Config::parse(fw::read_text_file(args.spec_path));
    const fw::ScenarioSpec spec = fw::scenario_from_config(cfg);
    const fw::GeneratedScenario scenario = fw::compose_scenario(spec);
    fw::write_file(args.out_pcap, scenario.pcap_bytes);
    fw::write_text_file(args.out_truth, fw::ground_truth_to_csv(scenario.ground_truth));
    std::cout << "wrote " << scenario.records.size() << " packets to " << args.out_pcap << " and "
              << scenario.ground_truth.size() << " window labels to " << args.out_truth << "\n";
    return 0;
}

struct ExtractArgs {
    std::string pcap_path;
    std::string device_ip;
    std::string attacker_ip;
    double samp = 1.0;
    std::string out_csv;
};

int cmd_extract(const ExtractArgs& args) {
    fw::ScenarioInput scenario;
    scenario.pcap_path = args.pcap_path;
    scenario.device_ip = fw::Ipv4::parse(args.device_ip);
    if (!args.attacker_ip.empty()) scenario.attack_ip = fw::Ipv4::parse(args.attacker_ip);
    scenario.samp = args.samp;
    const fw::LabeledDataset dataset = fw::build_dataset({{scenario}});
    fw::write_text_file(args.out_csv, fw::dataset_to_csv(dataset));
    std::cout << "extracted " << dataset.size() << " windows to " << args.out_csv << "\n";
    return 0;
}

struct TrainAnomalyArgs {
    std::string data_csv;
    std::string out_model;
    std::uint64_t seed = 0;
    fw::EnsembleConfig config;
    bool filter_normal = false;
};

int cmd_train_anomaly(const TrainAnomalyArgs& args) {
    fw::LabeledDataset dataset = fw::dataset_from_csv(fw::read_text_file(args.data_csv));
    if (args.filter_normal) {
        fw::LabeledDataset clean;
        clean.X = fw::Matrix(0, fw::kFeatureCount);
        for (std::size_t i = 0; i < dataset.size(); ++i)
            if (dataset.y[i] == fw::ClassLabel::Normal) {
                clean.X.push_row(dataset.X.row(i));
                clean.y.push_back(dataset.y[i]);
            }
        dataset = std::move(clean);
    }
    fw::EnsembleConfig config = args.config;
    config.seed = args.seed;
    const fw::AnomalyEnsemble ensemble = fw::ensemble_train(dataset, config);
    fw::write_text_file(args.out_model, fw::ensemble_to_json(ensemble).dump(2) + "\n");
    std::cout << "trained anomaly ensemble on " << dataset.size() << " clean windows -> "
              << args.out_model << "\n";
    return 0;
}

struct TrainAttackArgs {
    std::string data_csv;
    std::string out_model;
    std::string importance_csv;
    std::uint64_t seed = 0;
    double train_fraction = 0.6;
    fw::RandomForestConfig config;
};

int cmd_train_attack(const TrainAttackArgs& args) {
    const fw::LabeledDataset dataset = fw::dataset_from_csv(fw::read_text_file(args.data_csv));
    auto [train, test] = fw::train_test_split(dataset, args.train_fraction, args.seed);

    fw::RandomForestConfig config = args.config;
    config.seed = args.seed;
    const fw::RandomForestModel model = fw::rf_train(train, config);
    const fw::EvaluationResult held_out = fw::evaluate_classifier(
        [&model](std::span<const double> x) { return fw::rf_predict(model, x); }, test);

    fw::write_text_file(args.out_model, fw::forest_to_json(model).dump(2) + "\n");
    std::printf("random forest: %zu trees, train %zu / test %zu, held-out accuracy %.4f",
                model.trees.size(), train.size(), test.size(), held_out.accuracy);
    if (model.oob_available) std::printf(", oob accuracy %.4f", model.oob_accuracy);
    std::printf("\n");

    if (!args.importance_csv.empty()) {
        const fw::FeatureImportanceReport report = fw::rf_feature_importance(model);
        std::string csv = "feature,importance\n";
        for (std::size_t rank = 0; rank < fw::kFeatureCount; ++rank) {
            const std::size_t f = report.ranking[rank];
            char buf[80];
            std::snprintf(buf, sizeof(buf), "%s,%.15g\n",
                          std::string(fw::kFeatureNames[f]).c_str(), report.importance[f]);
            csv += buf;
        }
        fw::write_text_file(args.importance_csv, csv);
    }
    return 0;
}

struct DetectArgs {
    std::string pcap_path;
    std::string ensemble_path;
    std::string classifier_path;
    std::string device_ip;
    double samp = 1.0;
    double bin = 1.0;
    std::string out_report;
};

int cmd_detect(const DetectArgs& args) {
    const fw::AnomalyEnsemble ensemble =
        fw::ensemble_from_json(fw::parse_model_document(fw::read_text_file(args.ensemble_path)));
    const fw::RandomForestModel classifier =
        fw::forest_from_json(fw::parse_model_document(fw::read_text_file(args.classifier_path)));

    auto [meta, records] = fw::read_pcap(fw::read_file(args.pcap_path));
    fw::PipelineConfig config;
    config.device_ip = fw::Ipv4::parse(args.device_ip);
    config.samp = args.samp;
    config.throughput_bin = args.bin;

    const fw::DetectionReport report = fw::run_offline(records, config, ensemble, classifier);
    fw::write_text_file(args.out_report, fw::report_to_json(report).dump(2) + "\n");
    std::printf("%zu windows, %zu anomalies, %zu rules, mean response %.6fs -> %s\n",
                report.summary.windows, report.summary.anomalies, report.rules.size(),
                report.summary.mean_response_time, args.out_report.c_str());
    return 0;
}

struct EvaluateArgs {
    std::string data_csv;
    std::uint64_t seed = 0;
    double train_fraction = 0.6;
    std::string out_report;
};

int cmd_evaluate(const EvaluateArgs& args) {
    const fw::LabeledDataset dataset = fw::dataset_from_csv(fw::read_text_file(args.data_csv));
    auto [train, test] = fw::train_test_split(dataset, args.train_fraction, args.seed);

    std::vector<fw::NamedEvaluation> evaluations;

    fw::RandomForestConfig rf_config;
    rf_config.seed = args.seed;
    const fw::RandomForestModel forest = fw::rf_train(train, rf_config);
    evaluations.push_back(
        {"random_forest",
         fw::evaluate_classifier(
             [&forest](std::span<const double> x) { return fw::rf_predict(forest, x); }, test)});

    const fw::BaselineHyperparams hyper;
    for (const fw::BaselineVariant variant :
         {fw::BaselineVariant::LinearSvm, fw::BaselineVariant::LogisticRegression,
          fw::BaselineVariant::Knn}) {
        const fw::BaselineModel model = fw::baseline_train(variant, train, hyper, args.seed);
        evaluations.push_back(
            {std::string(fw::baseline_name(variant)),
             fw::evaluate_classifier(
                 [&model](std::span<const double> x) { return fw::baseline_predict(model, x); },
                 test)});
    }

    fw::write_text_file(args.out_report, fw::evaluation_report(evaluations));
    for (const fw::NamedEvaluation& e : evaluations)
        std::printf("%-20s accuracy %.4f%%\n", e.classifier.c_str(), e.result.accuracy * 100.0);
    return 0;
}

struct PcaArgs {
    std::string data_csv;
    std::string out_csv;
    std::size_t components = 2;
};

int cmd_pca_plotdata(const PcaArgs& args) {
    const fw::LabeledDataset dataset = fw::dataset_from_csv(fw::read_text_file(args.data_csv));
    if (dataset.size() < 2) throw fw::InvalidArgument("need at least 2 rows for PCA");

    const fw::Scaler scaler = fw::Scaler::fit(dataset.X);
    const fw::Matrix standardized = scaler.apply(dataset.X);
    const fw::PcaModel pca = fw::pca_fit(standardized, args.components);
    const fw::Matrix scores = fw::pca_transform(pca, standardized);

    std::string csv = "time";
    for (std::size_t c = 0; c < args.components; ++c) csv += ",pc" + std::to_string(c + 1);
    csv += ",label\n";
    for (std::size_t r = 0; r < scores.rows(); ++r) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%zu", r);
        csv += buf;
        for (std::size_t c = 0; c < args.components; ++c) {
            std::snprintf(buf, sizeof(buf), ",%.15g", scores(r, c));
            csv += buf;
        }
        std::snprintf(buf, sizeof(buf), ",%d\n", static_cast<int>(dataset.y[r]));
        csv += buf;
    }
    fw::write_text_file(args.out_csv, csv);
    std::cout << "wrote " << scores.rows() << " score rows to " << args.out_csv << "\n";
    return 0;
}

struct RulesArgs {
    std::string report_path;
    std::string format = "openflow";
    std::string out_path;
};

int cmd_rules(const RulesArgs& args) {
    const nlohmann::json doc =
        nlohmann::json::parse(fw::read_text_file(args.report_path), nullptr, false);
    if (doc.is_discarded() || doc.value("format", "") != "floodwatch-report")
        throw fw::FormatError("not a floodwatch detection report");

    std::string out;
    for (const auto& rule : doc.at("rules"))
        out += rule.at(args.format).get<std::string>() + "\n";
    fw::write_text_file(args.out_path, out);
    std::cout << "wrote " << doc.at("rules").size() << " rules to " << args.out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"IoT edge traffic analysis: windowed features, majority-vote anomaly "
                 "detection, flood classification, and mitigation-rule emission"};
    app.require_subcommand(1);

    GenerateArgs generate_args;
    CLI::App* generate = app.add_subcommand("generate", "Generate a synthetic scenario pcap");
    generate->add_option("--spec", generate_args.spec_path, "Scenario config file")->required();
    generate->add_option("--out-pcap", generate_args.out_pcap, "Output capture path")->required();
    generate->add_option("--out-truth", generate_args.out_truth, "Output ground-truth CSV")
        ->required();

    ExtractArgs extract_args;
    CLI::App* extract = app.add_subcommand("extract", "Extract windowed features from a pcap");
    extract->add_option("--pcap", extract_args.pcap_path, "Input capture")->required();
    extract->add_option("--device", extract_args.device_ip, "Device IPv4 address")->required();
    extract->add_option("--attacker", extract_args.attacker_ip,
                        "Attacker IPv4 address for labeling (omit for all-normal labels)");
    extract->add_option("--samp", extract_args.samp, "Window length in seconds")
        ->check(CLI::PositiveNumber);
    extract->add_option("--out", extract_args.out_csv, "Output dataset CSV")->required();

    TrainAnomalyArgs anomaly_args;
    CLI::App* train_anomaly =
        app.add_subcommand("train-anomaly", "Train the majority-vote anomaly ensemble");
    train_anomaly->add_option("--data", anomaly_args.data_csv, "Dataset CSV")->required();
    train_anomaly->add_option("--out", anomaly_args.out_model, "Output model file")->required();
    train_anomaly->add_option("--seed", anomaly_args.seed, "RNG seed")->required();
    train_anomaly->add_option("--nu", anomaly_args.config.nu, "One-class SVM nu");
    train_anomaly->add_option("--gamma", anomaly_args.config.gamma, "RBF gamma (0 = 1/d)");
    train_anomaly->add_option("--trees", anomaly_args.config.n_trees, "Isolation forest size");
    train_anomaly->add_option("--psi", anomaly_args.config.psi,
                              "Isolation forest subsample (0 = min(256, n))");
    train_anomaly->add_option("--contamination", anomaly_args.config.contamination,
                              "Assumed training outlier fraction");
    train_anomaly->add_option("--support-fraction", anomaly_args.config.support_fraction,
                              "MCD support fraction");
    train_anomaly->add_flag("--filter-normal", anomaly_args.filter_normal,
                            "Train on the dataset's normal rows only");

    TrainAttackArgs attack_args;
    CLI::App* train_attack =
        app.add_subcommand("train-attack", "Train the random-forest attack classifier");
    train_attack->add_option("--data", attack_args.data_csv, "Labeled dataset CSV")->required();
    train_attack->add_option("--out", attack_args.out_model, "Output model file")->required();
    train_attack->add_option("--seed", attack_args.seed, "RNG seed")->required();
    train_attack->add_option("--train-fraction", attack_args.train_fraction,
                             "Stratified train share")
        ->check(CLI::Range(0.01, 0.99));
    train_attack->add_option("--trees", attack_args.config.n_trees, "Number of trees");
    train_attack->add_option("--max-features", attack_args.config.max_features,
                             "Features considered per split");
    train_attack->add_option("--min-leaf", attack_args.config.min_leaf, "Minimum leaf size");
    train_attack->add_option("--importance-out", attack_args.importance_csv,
                             "Optional feature-importance CSV");

    DetectArgs detect_args;
    CLI::App* detect = app.add_subcommand("detect", "Run detection over a capture");
    detect->add_option("--pcap", detect_args.pcap_path, "Input capture")->required();
    detect->add_option("--ensemble", detect_args.ensemble_path, "Anomaly ensemble model file")
        ->required();
    detect->add_option("--classifier", detect_args.classifier_path, "Attack classifier file")
        ->required();
    detect->add_option("--device", detect_args.device_ip, "Device IPv4 address")->required();
    detect->add_option("--samp", detect_args.samp, "Window length in seconds")
        ->check(CLI::PositiveNumber);
    detect->add_option("--bin", detect_args.bin, "Throughput bin in seconds")
        ->check(CLI::PositiveNumber);
    detect->add_option("--out", detect_args.out_report, "Output report JSON")->required();

    EvaluateArgs evaluate_args;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Compare all four classifiers on one split");
    evaluate->add_option("--data", evaluate_args.data_csv, "Labeled dataset CSV")->required();
    evaluate->add_option("--seed", evaluate_args.seed, "RNG seed")->required();
    evaluate->add_option("--train-fraction", evaluate_args.train_fraction,
                         "Stratified train share")
        ->check(CLI::Range(0.01, 0.99));
    evaluate->add_option("--out", evaluate_args.out_report, "Output evaluation JSON")->required();

    PcaArgs pca_args;
    CLI::App* pca = app.add_subcommand("pca-plotdata", "Project a dataset onto PCA components");
    pca->add_option("--data", pca_args.data_csv, "Dataset CSV")->required();
    pca->add_option("--out", pca_args.out_csv, "Output score CSV")->required();
    pca->add_option("--components", pca_args.components, "Component count")
        ->check(CLI::Range(std::size_t{1}, fw::kFeatureCount));

    RulesArgs rules_args;
    CLI::App* rules = app.add_subcommand("rules", "Render mitigation rules from a report");
    rules->add_option("--report", rules_args.report_path, "Detection report JSON")->required();
    rules->add_option("--format", rules_args.format, "openflow or packetfilter")
        ->check(CLI::IsMember({"openflow", "packetfilter"}));
    rules->add_option("--out", rules_args.out_path, "Output rule text file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(generate_args);
        if (extract->parsed()) return cmd_extract(extract_args);
        if (train_anomaly->parsed()) return cmd_train_anomaly(anomaly_args);
        if (train_attack->parsed()) return cmd_train_attack(attack_args);
        if (detect->parsed()) return cmd_detect(detect_args);
        if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
        if (pca->parsed()) return cmd_pca_plotdata(pca_args);
        if (rules->parsed()) return cmd_rules(rules_args);
    } catch (const fw::BadConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fw::TrainingError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return 3;
    } catch (const fw::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
