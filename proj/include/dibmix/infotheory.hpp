#pragma once

#include "dibmix/error.hpp"
#include "dibmix/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

// All quantities are in nats.
namespace dibmix::info {

inline constexpr double probability_tolerance = 1e-9;

inline bool is_distribution(std::span<const double> p, double tol = probability_tolerance) {
    double total = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            return false;
        }
        total += v;
    }
    return !p.empty() && std::abs(total - 1.0) <= tol;
}

/// Shannon entropy with 0 log 0 = 0. Rounding below zero is clipped.
inline double entropy(std::span<const double> p) {
    require(is_distribution(p), "invalid_distribution", "entropy: input is not a probability vector");
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) {
            h -= v * std::log(v);
        }
    }
    return std::max(h, 0.0);
}

/// KL(p || q). Returns +inf when p puts mass where q has none.
inline double kl_divergence(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), "length_mismatch", "kl_divergence: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) {
            continue;
        }
        if (q[i] <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

/// I(T;Y) of a joint distribution with rows indexing T and columns Y.
/// Rounding below zero is clipped.
inline double mutual_information(const Matrix<double>& joint) {
    require(is_distribution(joint.data()), "invalid_distribution",
            "mutual_information: joint does not sum to 1");
    std::vector<double> row_sum(joint.rows(), 0.0);
    std::vector<double> col_sum(joint.cols(), 0.0);
    for (std::size_t t = 0; t < joint.rows(); ++t) {
        for (std::size_t y = 0; y < joint.cols(); ++y) {
            row_sum[t] += joint(t, y);
            col_sum[y] += joint(t, y);
        }
    }
    double mi = 0.0;
    for (std::size_t t = 0; t < joint.rows(); ++t) {
        for (std::size_t y = 0; y < joint.cols(); ++y) {
            const double pty = joint(t, y);
            if (pty > 0.0) {
                mi += pty * std::log(pty / (row_sum[t] * col_sum[y]));
            }
        }
    }
    return std::max(mi, 0.0);
}

} // namespace dibmix::info
