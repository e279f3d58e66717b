#pragma once

// Robust elliptical boundary on standardized features. Location and
// scatter come from FAST-MCD: random (d+1)-element starts, each refined by
// C-steps (recompute mean/covariance on the h points with the smallest
// Mahalanobis distances) until the covariance determinant stops shrinking;
// the subset with the minimal determinant wins. The winning covariance is
// consistency-rescaled for the h/n trimming fraction and ridged to stay
// SPD, and the decision threshold is a quantile of the training distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/mlcore.hpp"
#include "floodwatch/rng.hpp"

namespace floodwatch {

namespace detail {

// Regularized lower incomplete gamma P(a, x) by series / continued
// fraction (Numerical Recipes style).
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw InvalidArgument("gamma_p domain");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        double ap = a;
        double sum = 1.0 / a;
        double term = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    // Continued fraction for Q(a, x) = 1 - P(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    return 1.0 - q;
}

inline double chi2_cdf(double x, double k) { return gamma_p(k / 2.0, x / 2.0); }

inline double chi2_quantile(double p, double k) {
    double lo = 0.0, hi = std::max(4.0 * k, 16.0);
    while (chi2_cdf(hi, k) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, k) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Asymptotic consistency factor for an h/n MCD trimming fraction; exactly
// 1 at full support, where MCD coincides with the classical estimate.
inline double mcd_consistency_factor(double support_fraction, std::size_t d) {
    if (support_fraction >= 1.0) return 1.0;
    const double q = chi2_quantile(support_fraction, static_cast<double>(d));
    const double denom = chi2_cdf(q, static_cast<double>(d) + 2.0);
    return support_fraction / denom;
}

} // namespace detail

struct McdResult {
    std::vector<double> location;
    Matrix covariance; // rescaled + ridged, SPD
    std::vector<double> raw_distances;
    bool cstep_monotone = true; // determinant never rose across any C-step
    std::size_t csteps = 0;
};

struct McdConfig {
    double support_fraction = 0.75;
    std::size_t n_starts = 50;
    std::size_t max_csteps = 40;
};

namespace detail {

struct SubsetEstimate {
    std::vector<double> mean;
    Matrix cov;
    double logdet = 0.0;
    bool singular = false;
};

inline SubsetEstimate estimate_subset(const Matrix& x, std::span<const std::size_t> subset) {
    SubsetEstimate est;
    const std::size_t d = x.cols();
    est.mean.assign(d, 0.0);
    for (std::size_t idx : subset)
        for (std::size_t c = 0; c < d; ++c) est.mean[c] += x(idx, c);
    for (double& v : est.mean) v /= static_cast<double>(subset.size());

    est.cov = Matrix(d, d);
    std::vector<double> centered(d);
    for (std::size_t idx : subset) {
        for (std::size_t c = 0; c < d; ++c) centered[c] = x(idx, c) - est.mean[c];
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) est.cov(i, j) += centered[i] * centered[j];
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            est.cov(i, j) /= static_cast<double>(subset.size());
            est.cov(j, i) = est.cov(i, j);
        }

    try {
        est.logdet = log_determinant_spd(est.cov);
    } catch (const NotPositiveDefinite&) {
        est.singular = true;
        est.logdet = -std::numeric_limits<double>::infinity();
    }
    return est;
}

inline Matrix ridge_regularize(Matrix cov, double epsilon_scale) {
    double trace = 0.0;
    for (std::size_t i = 0; i < cov.rows(); ++i) trace += cov(i, i);
    const double d = static_cast<double>(cov.rows());
    const double eps = std::max(epsilon_scale * trace / d, 1e-12);
    for (std::size_t i = 0; i < cov.rows(); ++i) cov(i, i) += eps;
    return cov;
}

// Distances under the estimate; a singular covariance falls back to its
// ridged version so refinement can continue in the spanned subspace.
inline std::vector<double> all_distances(const Matrix& x, const SubsetEstimate& est) {
    const Matrix usable = est.singular ? ridge_regularize(est.cov, 1e-6) : est.cov;
    const Matrix l = cholesky(usable);
    std::vector<double> dist(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
        dist[i] = mahalanobis_with_factor(x.row(i), est.mean, l);
    return dist;
}

inline std::vector<std::size_t> h_smallest(const std::vector<double>& dist, std::size_t h) {
    std::vector<std::size_t> order(dist.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&dist](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a < b;
    });
    order.resize(h);
    return order;
}

} // namespace detail

inline McdResult mcd_fit(const Matrix& x, double support_fraction, std::uint64_t seed,
                         const McdConfig& config = {}) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n <= d + 1) throw TooFewSamples("MCD needs more than d+1 rows");
    const auto h = static_cast<std::size_t>(
        std::floor(support_fraction * static_cast<double>(n) + 1e-9));
    if (h < d + 1) throw TooFewSamples("support h below d+1");
    if (h > n) throw InvalidArgument("support fraction above 1");

    McdResult result;
    detail::SubsetEstimate best;
    bool have_best = false;

    // Full support needs no search: the classical estimate is the answer.
    const std::size_t starts = (h == n) ? 1 : config.n_starts;
    Xoshiro256 rng(derive_seed(seed, 7));

    for (std::size_t s = 0; s < starts; ++s) {
        std::vector<std::size_t> subset;
        if (h == n) {
            subset.resize(n);
            std::iota(subset.begin(), subset.end(), 0);
        } else {
            subset = sample_without_replacement(n, d + 1, rng);
        }
        detail::SubsetEstimate est = detail::estimate_subset(x, subset);
        bool est_from_h_subset = subset.size() == h;

        for (std::size_t step = 0; step < config.max_csteps && h < n; ++step) {
            const std::vector<double> dist = detail::all_distances(x, est);
            const std::vector<std::size_t> next = detail::h_smallest(dist, h);
            detail::SubsetEstimate refined = detail::estimate_subset(x, next);
            ++result.csteps;

            // C-step theorem: between h-subset estimates the determinant
            // cannot increase. The seed is a (d+1)-subset, so the first
            // step is outside the theorem and exempt.
            if (est_from_h_subset && !est.singular && !refined.singular &&
                refined.logdet > est.logdet + 1e-9 * std::abs(est.logdet) + 1e-12)
                result.cstep_monotone = false;

            const bool improved = !est_from_h_subset ||
                                  (est.singular && !refined.singular) ||
                                  refined.logdet < est.logdet - 1e-12;
            est = std::move(refined);
            est_from_h_subset = true;
            if (!improved) break;
        }

        if (!have_best || est.logdet < best.logdet) {
            best = std::move(est);
            have_best = true;
        }
    }

    result.location = best.mean;
    Matrix cov = best.cov;
    const double factor =
        detail::mcd_consistency_factor(static_cast<double>(h) / static_cast<double>(n), d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) cov(i, j) *= factor;
    cov = detail::ridge_regularize(std::move(cov), 1e-6);

    Matrix l;
    try {
        l = cholesky(cov);
    } catch (const NotPositiveDefinite&) {
        throw SingularCovariance("covariance not SPD after regularization");
    }
    result.covariance = std::move(cov);
    result.raw_distances.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        result.raw_distances[i] = mahalanobis_with_factor(x.row(i), result.location, l);
    return result;
}

struct EnvelopeModel {
    std::vector<double> location;
    Matrix covariance;
    double dist_threshold = 0.0;
    Scaler scaler;
    bool cstep_monotone = true;
};

inline EnvelopeModel envelope_train(const Matrix& x_raw, double contamination,
                                    double support_fraction, std::uint64_t seed,
                                    const McdConfig& config = {}) {
    EnvelopeModel model;
    model.scaler = Scaler::fit(x_raw);
    const Matrix x = model.scaler.apply(x_raw);

    McdResult mcd = mcd_fit(x, support_fraction, seed, config);
    model.location = std::move(mcd.location);
    model.covariance = std::move(mcd.covariance);
    model.cstep_monotone = mcd.cstep_monotone;

    std::vector<double> sorted = mcd.raw_distances;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const auto k_above = static_cast<std::size_t>(
        std::floor(contamination * static_cast<double>(sorted.size()) + 1e-9));
    model.dist_threshold = sorted[std::min(k_above, sorted.size() - 1)];
    return model;
}

inline double envelope_distance(const EnvelopeModel& model, std::span<const double> x) {
    return mahalanobis(model.scaler.apply_row(x), model.location, model.covariance);
}

inline int envelope_predict(const EnvelopeModel& model, std::span<const double> x) {
    return envelope_distance(model, x) > model.dist_threshold ? -1 : +1;
}

} // namespace floodwatch
