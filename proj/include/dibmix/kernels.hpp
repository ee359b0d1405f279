#pragma once

#include "dibmix/dataset.hpp"
#include "dibmix/error.hpp"
#include "dibmix/matrix.hpp"
#include "dibmix/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace dibmix {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267794; // 1 / sqrt(2 pi)

/// Gaussian kernel evaluated at a raw difference with bandwidth s:
/// (1/sqrt(2 pi)) exp(-diff^2 / (2 s^2)).
inline double gaussian_kernel(double diff, double s) {
    return inv_sqrt_2pi * std::exp(-(diff * diff) / (2.0 * s * s));
}

/// Largest admissible Aitchison-Aitken smoothing for a variable with `levels` levels.
inline double max_lambda(int levels) { return static_cast<double>(levels - 1) / static_cast<double>(levels); }

inline bool lambda_admissible(double lambda, int levels) {
    constexpr double slack = 1e-12;
    return levels >= 2 && lambda >= 0.0 && lambda <= max_lambda(levels) + slack;
}

/// Aitchison-Aitken kernel: 1 - lambda on a match, lambda / (l - 1) otherwise.
inline double aitchison_aitken(bool match, double lambda, int levels) {
    require(levels >= 2, "invalid_bandwidth", "categorical kernel needs at least 2 levels");
    require(lambda_admissible(lambda, levels), "invalid_bandwidth",
            "lambda " + std::to_string(lambda) + " outside [0, (l-1)/l] for l=" + std::to_string(levels));
    return match ? 1.0 - lambda : lambda / static_cast<double>(levels - 1);
}

/// Smoothing parameters: either one s shared by all continuous variables or
/// one per variable, and one lambda per categorical variable.
struct Bandwidths {
    std::vector<double> s;
    std::vector<double> lambda;

    [[nodiscard]] double s_for(std::size_t c) const { return s.size() == 1 ? s.front() : s.at(c); }

    void validate(const MixedDataset& ds) const {
        if (ds.continuous_count() > 0) {
            require(s.size() == 1 || s.size() == ds.continuous_count(), "invalid_bandwidth",
                    "expected 1 or " + std::to_string(ds.continuous_count()) + " continuous bandwidths");
            for (double v : s) {
                require(std::isfinite(v) && v > 0.0, "invalid_bandwidth", "continuous bandwidth must be > 0");
            }
        }
        require(lambda.size() == ds.categorical_count(), "invalid_bandwidth",
                "expected " + std::to_string(ds.categorical_count()) + " categorical bandwidths, got " +
                    std::to_string(lambda.size()));
        for (std::size_t d = 0; d < lambda.size(); ++d) {
            require(lambda_admissible(lambda[d], ds.levels(d)), "invalid_bandwidth",
                    "lambda for '" + ds.categorical_variable(d).name + "' outside [0, (l-1)/l]");
        }
    }
};

/// Unnormalized generalized product kernel between observations i and j.
inline double product_kernel(const MixedDataset& ds, std::size_t i, std::size_t j, const Bandwidths& bw) {
    double value = 1.0;
    const auto& cont = ds.continuous();
    for (std::size_t c = 0; c < ds.continuous_count(); ++c) {
        value *= gaussian_kernel(cont(i, c) - cont(j, c), bw.s_for(c));
    }
    const auto& cat = ds.categorical();
    for (std::size_t d = 0; d < ds.categorical_count(); ++d) {
        value *= aitchison_aitken(cat(i, d) == cat(j, d), bw.lambda[d], ds.levels(d));
    }
    return value;
}

/// p(y|x) over the observed points: row i is the distribution of the
/// location Y given observation x_i, columns index observed locations.
struct ConditionalDensity {
    Matrix<double>      matrix;
    std::vector<double> marginal_y;

    [[nodiscard]] std::size_t size() const noexcept { return matrix.rows(); }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return matrix.row(i); }
};

struct DensityOptions {
    std::size_t max_n = 10000; // n x n doubles: 800 MB at the cap
    unsigned    threads = 1;
};

/// Kernel density estimate of p(y|x). Rows are evaluated in log space
/// and shifted by their maximum before normalization, so many continuous
/// variables do not underflow the whole row.
inline ConditionalDensity estimate_conditional(const MixedDataset& ds, const Bandwidths& bw,
                                               const DensityOptions& opts = {}) {
    bw.validate(ds);
    const std::size_t n = ds.size();
    require(n <= opts.max_n, "size_limit",
            "n=" + std::to_string(n) + " exceeds the density matrix cap of " + std::to_string(opts.max_n) +
                " observations; subsample the data or raise the cap");

    const std::size_t pc = ds.continuous_count();
    const std::size_t pd = ds.categorical_count();
    constexpr double  neg_inf = -std::numeric_limits<double>::infinity();

    std::vector<double> inv_two_s2(pc);
    for (std::size_t c = 0; c < pc; ++c) {
        inv_two_s2[c] = 1.0 / (2.0 * bw.s_for(c) * bw.s_for(c));
    }
    std::vector<double> log_match(pd);
    std::vector<double> log_mismatch(pd);
    for (std::size_t d = 0; d < pd; ++d) {
        const double hit = aitchison_aitken(true, bw.lambda[d], ds.levels(d));
        const double miss = aitchison_aitken(false, bw.lambda[d], ds.levels(d));
        log_match[d] = std::log(hit);
        log_mismatch[d] = miss > 0.0 ? std::log(miss) : neg_inf;
    }

    ConditionalDensity out{Matrix<double>(n, n), std::vector<double>(n, 0.0)};
    const auto&        cont = ds.continuous();
    const auto&        cat = ds.categorical();

    parallel_for(n, opts.threads, [&](std::size_t i) {
        auto   row = out.matrix.row(i);
        double row_max = neg_inf;
        for (std::size_t j = 0; j < n; ++j) {
            double log_k = 0.0;
            for (std::size_t c = 0; c < pc; ++c) {
                const double diff = cont(i, c) - cont(j, c);
                log_k -= diff * diff * inv_two_s2[c];
            }
            for (std::size_t d = 0; d < pd; ++d) {
                log_k += cat(i, d) == cat(j, d) ? log_match[d] : log_mismatch[d];
            }
            row[j] = log_k;
            row_max = std::max(row_max, log_k);
        }
        require(row_max > neg_inf, "degenerate_smoothing",
                "observation " + std::to_string(i) + " has zero kernel mass everywhere", ErrorKind::numerical);
        double total = 0.0;
        for (double& v : row) {
            v = std::exp(v - row_max);
            total += v;
        }
        for (double& v : row) {
            v /= total;
        }
    });

    const auto& w = ds.weights();
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = out.matrix.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            out.marginal_y[j] += w[i] * row[j];
        }
    }
    return out;
}

} // namespace dibmix
