#pragma once

// One-class SVM with RBF kernel, nu parameterization. The dual
//
//   min  1/2 a^T Q a   s.t.  0 <= a_i <= 1/(nu n),  sum a_i = 1
//
// is solved by pairwise coordinate descent with maximal-violating-pair
// working-set selection, to a KKT violation tolerance of 1e-3. The
// decision function is f(x) = sum_i a_i K(x, x_i) - rho with f < 0
// flagging an outlier; sign(0) is +1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "floodwatch/errors.hpp"
#include "floodwatch/matrix.hpp"
#include "floodwatch/mlcore.hpp"

namespace floodwatch {

struct OcsvmModel {
    Matrix support_vectors; // standardized rows
    std::vector<double> alphas;
    double rho = 0.0;
    double gamma = 0.0;
    Scaler scaler;
};

inline double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    return std::exp(-gamma * squared_distance(a, b));
}

// Raw decision value on an already-standardized point.
inline double ocsvm_decision_standardized(const OcsvmModel& model, std::span<const double> x_std) {
    double sum = 0.0;
    for (std::size_t i = 0; i < model.alphas.size(); ++i)
        sum += model.alphas[i] * rbf_kernel(model.support_vectors.row(i), x_std, model.gamma);
    return sum - model.rho;
}

inline double ocsvm_decision(const OcsvmModel& model, std::span<const double> x) {
    return ocsvm_decision_standardized(model, model.scaler.apply_row(x));
}

inline int ocsvm_predict(const OcsvmModel& model, std::span<const double> x) {
    return ocsvm_decision(model, x) < 0.0 ? -1 : +1;
}

inline OcsvmModel ocsvm_train(const Matrix& x_raw, double nu, double gamma,
                              double tolerance = 1e-3) {
    const std::size_t n = x_raw.rows();
    if (n < 2) throw TooFewSamples("one-class SVM needs at least 2 rows");
    if (!(nu > 0.0) || !(nu < 1.0)) throw InvalidArgument("nu must be in (0, 1)");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");

    Scaler scaler = Scaler::fit(x_raw);
    const Matrix x = scaler.apply(x_raw);

    Matrix gram(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        gram(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = rbf_kernel(x.row(i), x.row(j), gamma);
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }

    const double upper = 1.0 / (nu * static_cast<double>(n));
    std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
    std::vector<double> grad(n, 0.0); // grad_i = (Q alpha)_i
    for (std::size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) g += gram(i, j) * alpha[j];
        grad[i] = g;
    }

    const std::uint64_t max_updates = 100000ULL * static_cast<std::uint64_t>(n);
    const double bound_slack = 1e-12;
    bool converged = false;

    for (std::uint64_t iter = 0; iter < max_updates; ++iter) {
        // Maximal violating pair: i pushes up (alpha_i < C), j pushes down
        // (alpha_j > 0). KKT holds when max(-grad_i) - min(-grad_j) <= tol.
        std::size_t best_i = n, best_j = n;
        double up = -std::numeric_limits<double>::infinity();
        double down = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (alpha[k] < upper - bound_slack && -grad[k] > up) {
                up = -grad[k];
                best_i = k;
            }
            if (alpha[k] > bound_slack && -grad[k] < down) {
                down = -grad[k];
                best_j = k;
            }
        }
        if (best_i == n || best_j == n || up - down <= tolerance) {
            converged = true;
            break;
        }

        const std::size_t i = best_i, j = best_j;
        double eta = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
        if (eta <= 1e-12) eta = 1e-12;
        double delta = (grad[j] - grad[i]) / eta;
        delta = std::min(delta, std::min(upper - alpha[i], alpha[j]));
        delta = std::max(delta, std::max(-alpha[i], alpha[j] - upper));
        if (delta == 0.0) {
            // Box-blocked pair; with a PSD Gram this only happens on
            // degenerate (duplicate-point) instances.
            throw DegenerateGram("working pair blocked by box constraints");
        }
        alpha[i] += delta;
        alpha[j] -= delta;
        for (std::size_t k = 0; k < n; ++k) grad[k] += delta * (gram(k, i) - gram(k, j));
    }
    if (!converged) throw NonConvergence("one-class SVM hit the update cap");

    // rho is the KKT multiplier of the equality constraint: grad_i for free
    // vectors; fall back to the midpoint of the bound groups.
    double rho_sum = 0.0;
    std::size_t rho_count = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (alpha[k] > bound_slack && alpha[k] < upper - bound_slack) {
            rho_sum += grad[k];
            ++rho_count;
        }
    double rho;
    if (rho_count > 0) {
        rho = rho_sum / static_cast<double>(rho_count);
    } else {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (alpha[k] >= upper - bound_slack) lo = std::max(lo, grad[k]);
            if (alpha[k] <= bound_slack) hi = std::min(hi, grad[k]);
        }
        if (!std::isfinite(lo)) lo = hi;
        if (!std::isfinite(hi)) hi = lo;
        rho = 0.5 * (lo + hi);
    }

    OcsvmModel model;
    model.gamma = gamma;
    model.rho = rho;
    model.scaler = std::move(scaler);
    model.support_vectors = Matrix(0, x.cols());
    for (std::size_t k = 0; k < n; ++k)
        if (alpha[k] > 1e-8) {
            model.support_vectors.push_row(x.row(k));
            model.alphas.push_back(alpha[k]);
        }
    return model;
}

} // namespace floodwatch
