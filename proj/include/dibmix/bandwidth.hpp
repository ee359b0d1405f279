#pragma once

#include "dibmix/dataset.hpp"
#include "dibmix/error.hpp"
#include "dibmix/kernels.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace dibmix {

/// Silverman-type rate for the shared continuous bandwidth on
/// standardized data: multiplier * n^(-1/(4 + p_c)).
inline double default_s(const MixedDataset& ds, double multiplier = 3.0) {
    require(ds.continuous_count() >= 1, "invalid_argument", "default_s needs at least one continuous variable");
    require(ds.size() >= 2, "invalid_argument", "default_s needs at least 2 observations");
    require(multiplier > 0.0, "invalid_argument", "s multiplier must be positive");
    const double n = static_cast<double>(ds.size());
    const double pc = static_cast<double>(ds.continuous_count());
    return multiplier * std::pow(n, -1.0 / (4.0 + pc));
}

/// Mean over continuous variables of the population variance of the
/// Gaussian kernel values over all ordered pairs (i, j), i == j included.
inline double continuous_kernel_variance(const MixedDataset& ds, double s) {
    require(ds.continuous_count() >= 1, "invalid_argument", "no continuous variables");
    const std::size_t n = ds.size();
    const double      pairs = static_cast<double>(n) * static_cast<double>(n);
    const auto&       x = ds.continuous();
    double            total = 0.0;
    for (std::size_t c = 0; c < ds.continuous_count(); ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                sum += gaussian_kernel(x(i, c) - x(j, c), s);
            }
        }
        const double mean = sum / pairs;
        double       ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double dev = gaussian_kernel(x(i, c) - x(j, c), s) - mean;
                ss += dev * dev;
            }
        }
        total += ss / pairs;
    }
    return total / static_cast<double>(ds.continuous_count());
}

/// Fraction of ordered pairs (i, j) that agree on categorical variable d.
inline double categorical_match_fraction(const MixedDataset& ds, std::size_t d) {
    std::vector<double> counts(static_cast<std::size_t>(ds.levels(d)), 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        counts[static_cast<std::size_t>(ds.categorical()(i, d))] += 1.0;
    }
    const double n = static_cast<double>(ds.size());
    double       same = 0.0;
    for (double c : counts) {
        same += c * c;
    }
    return same / (n * n);
}

/// Mean over categorical variables of the population variance of the
/// Aitchison-Aitken kernel values over all ordered pairs. The multiset of
/// pair values is two-valued, so it is summarized by the match fraction.
inline double categorical_kernel_variance(const MixedDataset& ds, const std::vector<double>& lambda) {
    require(ds.categorical_count() >= 1, "invalid_argument", "no categorical variables");
    require(lambda.size() == ds.categorical_count(), "invalid_bandwidth", "lambda length mismatch");
    double total = 0.0;
    for (std::size_t d = 0; d < ds.categorical_count(); ++d) {
        const double m = categorical_match_fraction(ds, d);
        const double hit = aitchison_aitken(true, lambda[d], ds.levels(d));
        const double miss = aitchison_aitken(false, lambda[d], ds.levels(d));
        const double mean = m * hit + (1.0 - m) * miss;
        total += m * (hit - mean) * (hit - mean) + (1.0 - m) * (miss - mean) * (miss - mean);
    }
    return total / static_cast<double>(ds.categorical_count());
}

/// lambda_j = alpha * (l_j - 1) / l_j for every categorical variable.
inline std::vector<double> lambda_from_alpha(const MixedDataset& ds, double alpha) {
    std::vector<double> lambda(ds.categorical_count());
    for (std::size_t d = 0; d < lambda.size(); ++d) {
        lambda[d] = alpha * max_lambda(ds.levels(d));
    }
    return lambda;
}

/// lambda_j = (l_j - 1) / l_j - offset, floored at 0.
inline std::vector<double> lambda_from_offset(const MixedDataset& ds, double offset) {
    std::vector<double> lambda(ds.categorical_count());
    for (std::size_t d = 0; d < lambda.size(); ++d) {
        lambda[d] = std::max(0.0, max_lambda(ds.levels(d)) - offset);
    }
    return lambda;
}

struct LambdaSelection {
    std::vector<double> lambda;
    double              alpha = 0.0;
    double              target = 0.0;   // w * continuous kernel variance
    double              achieved = 0.0; // categorical kernel variance at lambda
    int                 iterations = 0;
    bool                clamped = false;       // target above the alpha = 0 maximum
    bool                degenerate = false;    // every categorical column constant
    bool                no_continuous = false; // p_c = 0 fallback used
};

/// Picks lambda so the mean categorical kernel-value variance matches
/// `categorical_weight` times the mean continuous one. A single scale
/// alpha in [0, 1] is shared by all variables and found by bisection; the
/// variance is decreasing in alpha and vanishes at alpha = 1.
inline LambdaSelection select_lambda(const MixedDataset& ds, double s, double categorical_weight = 1.0) {
    require(ds.categorical_count() >= 1, "invalid_argument", "select_lambda needs a categorical variable");
    require(categorical_weight > 0.0, "invalid_argument", "categorical weight must be positive");

    LambdaSelection out;
    if (ds.continuous_count() == 0) {
        out.no_continuous = true;
        out.lambda.resize(ds.categorical_count());
        for (std::size_t d = 0; d < out.lambda.size(); ++d) {
            out.lambda[d] = std::max(0.0, max_lambda(ds.levels(d)) - 0.2);
        }
        out.achieved = categorical_kernel_variance(ds, out.lambda);
        return out;
    }

    out.target = categorical_weight * continuous_kernel_variance(ds, s);
    auto variance_at = [&](double alpha) { return categorical_kernel_variance(ds, lambda_from_alpha(ds, alpha)); };

    const double v_max = variance_at(0.0);
    if (v_max <= 0.0) {
        out.degenerate = true;
        out.alpha = 0.5;
    } else if (out.target <= 0.0) {
        out.alpha = 1.0;
    } else if (out.target >= v_max) {
        out.alpha = 0.0;
        out.clamped = out.target > v_max;
    } else {
        double lo = 0.0;
        double hi = 1.0;
        constexpr int max_iter = 100;
        for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) {
                break;
            }
            (variance_at(mid) > out.target ? lo : hi) = mid;
        }
        out.alpha = 0.5 * (lo + hi);
    }
    out.lambda = lambda_from_alpha(ds, out.alpha);
    out.achieved = variance_at(out.alpha);
    return out;
}

/// How s and lambda are chosen when not given explicitly.
struct BalanceSpec {
    double                             categorical_weight = 1.0;
    double                             s_multiplier = 3.0;
    std::optional<double>              s_value;       // overrides default_s
    std::optional<std::vector<double>> lambda_value;  // overrides select_lambda
    std::optional<double>              lambda_offset; // lambda = (l-1)/l - offset
};

struct BandwidthChoice {
    Bandwidths                     bandwidths;
    std::optional<LambdaSelection> selection;
};

inline BandwidthChoice select_bandwidths(const MixedDataset& ds, const BalanceSpec& spec) {
    require(spec.categorical_weight > 0.0, "invalid_argument", "categorical weight must be positive");
    BandwidthChoice out;
    double          s = 1.0;
    if (ds.continuous_count() > 0) {
        s = spec.s_value ? *spec.s_value : default_s(ds, spec.s_multiplier);
        require(s > 0.0, "invalid_bandwidth", "s must be positive");
        out.bandwidths.s = {s};
    }
    if (ds.categorical_count() > 0) {
        if (spec.lambda_value) {
            out.bandwidths.lambda = *spec.lambda_value;
        } else if (spec.lambda_offset) {
            out.bandwidths.lambda = lambda_from_offset(ds, *spec.lambda_offset);
        } else {
            out.selection = select_lambda(ds, s, spec.categorical_weight);
            out.bandwidths.lambda = out.selection->lambda;
        }
    }
    out.bandwidths.validate(ds);
    return out;
}

} // namespace dibmix
