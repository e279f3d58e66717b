#pragma once

// Majority-vote anomaly ensemble: isolation forest + one-class SVM +
// elliptic envelope, each trained on the same clean traffic and voting
// in {-1, +1}. The verdict sums the three votes; a negative sum is an
// anomaly. With three odd votes the sum is never zero, so there is no tie.

#include <cstdint>
#include <span>
#include <vector>

#include "floodwatch/elliptic_envelope.hpp"
#include "floodwatch/errors.hpp"
#include "floodwatch/features.hpp"
#include "floodwatch/isolation_forest.hpp"
#include "floodwatch/ocsvm.hpp"

namespace floodwatch {

struct EnsembleConfig {
    double nu = 0.05;
    double gamma = 0.0; // 0 means 1/d
    std::size_t n_trees = 100;
    std::size_t psi = 0; // 0 means min(256, n)
    double contamination = 0.02;
    double support_fraction = 0.75;
    std::uint64_t seed = 0;

    double effective_gamma(std::size_t d) const {
        return gamma > 0.0 ? gamma : 1.0 / static_cast<double>(d);
    }
    std::size_t effective_psi(std::size_t n) const {
        return psi > 0 ? std::min(psi, n) : std::min<std::size_t>(256, n);
    }
};

struct Verdict {
    int p1 = 0; // isolation forest
    int p2 = 0; // one-class SVM
    int p3 = 0; // elliptic envelope
    int p_sum = 0;
    bool is_anomaly = false;
    // Raw member outputs, for diagnostics.
    double iforest_score = 0.0;
    double ocsvm_decision = 0.0;
    double envelope_distance = 0.0;
};

inline Verdict combine_votes(int p1, int p2, int p3) {
    Verdict v;
    v.p1 = p1;
    v.p2 = p2;
    v.p3 = p3;
    v.p_sum = p1 + p2 + p3;
    v.is_anomaly = v.p_sum < 0;
    return v;
}

struct AnomalyEnsemble {
    IsoForestModel iforest;
    OcsvmModel ocsvm;
    EnvelopeModel envelope;
    EnsembleConfig config;
};

inline AnomalyEnsemble ensemble_train(const LabeledDataset& clean, const EnsembleConfig& config) {
    for (ClassLabel label : clean.y)
        if (label != ClassLabel::Normal)
            throw ContaminatedTrainingSet("training set contains non-normal rows");
    const std::size_t n = clean.size();
    if (n < 50) throw TooFewSamples("ensemble training needs at least 50 clean rows");

    AnomalyEnsemble ens;
    ens.config = config;
    const std::size_t d = clean.X.cols();
    ens.iforest = iforest_train(clean.X, config.n_trees, config.effective_psi(n),
                                config.contamination, derive_seed(config.seed, 1));
    ens.ocsvm = ocsvm_train(clean.X, config.nu, config.effective_gamma(d));
    ens.envelope = envelope_train(clean.X, config.contamination, config.support_fraction,
                                  derive_seed(config.seed, 2));
    return ens;
}

inline Verdict ensemble_predict(const AnomalyEnsemble& ens, std::span<const double> x) {
    const double score = iforest_score(ens.iforest, x);
    const double decision = ocsvm_decision(ens.ocsvm, x);
    const double distance = envelope_distance(ens.envelope, x);
    Verdict v = combine_votes(score > ens.iforest.threshold ? -1 : +1,
                              decision < 0.0 ? -1 : +1,
                              distance > ens.envelope.dist_threshold ? -1 : +1);
    v.iforest_score = score;
    v.ocsvm_decision = decision;
    v.envelope_distance = distance;
    return v;
}

inline Verdict ensemble_predict(const AnomalyEnsemble& ens, const FeatureVector& fv) {
    return ensemble_predict(ens, std::span<const double>(fv.data(), fv.size()));
}

} // namespace floodwatch
