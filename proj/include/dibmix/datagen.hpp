#pragma once

#include "dibmix/dataset.hpp"
#include "dibmix/error.hpp"
#include "dibmix/matrix.hpp"
#include "dibmix/metrics.hpp"
#include "dibmix/seeding.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dibmix {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Inverse standard normal CDF. Acklam's rational approximation (relative
/// error below 1.15e-9) followed by one Halley step against erfc, which
/// brings the result to near machine precision.
inline double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "invalid_argument", "normal_quantile needs 0 < p < 1");
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                             1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                             6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                             -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                             3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x = 0.0;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

/// Mean gap between two unit-variance normals whose densities overlap by
/// `overlap` in area: overlap = 2 Phi(-gap / 2).
inline double continuous_separation(double overlap) {
    require(overlap > 0.0 && overlap < 1.0, "invalid_argument", "overlap must lie in (0, 1)");
    return -2.0 * normal_quantile(overlap / 2.0);
}

struct CategoricalMasses {
    std::vector<double> first;
    std::vector<double> second;
};

/// Two level distributions with sum_v min(first_v, second_v) = overlap:
/// 1 - overlap sits on level 0 (first) or level 1 (second), and the
/// remaining overlap is spread uniformly over all levels in both.
inline CategoricalMasses categorical_masses(double overlap, int levels) {
    require(overlap > 0.0 && overlap < 1.0, "invalid_argument", "overlap must lie in (0, 1)");
    require(levels >= 2, "invalid_argument", "categorical variables need at least 2 levels");
    const double shared = overlap / static_cast<double>(levels);
    CategoricalMasses out{std::vector<double>(static_cast<std::size_t>(levels), shared),
                          std::vector<double>(static_cast<std::size_t>(levels), shared)};
    out.first[0] += 1.0 - overlap;
    out.second[1] += 1.0 - overlap;
    return out;
}

enum class Balance { equal, imbalanced };

inline std::string to_string(Balance b) { return b == Balance::equal ? "equal" : "imbalanced"; }

inline Balance parse_balance(const std::string& s) {
    if (s == "equal") {
        return Balance::equal;
    }
    require(s == "imbalanced", "invalid_argument", "balance must be 'equal' or 'imbalanced'");
    return Balance::imbalanced;
}

/// Two-cluster normal / multinomial mixture. `clusters` > 2 is an
/// experimental extension outside the replication design: cluster c gets
/// mean c * gap and dominant level c mod l, sizes equal.
struct GenSpec {
    std::size_t           n = 200;
    std::size_t           continuous = 2;
    std::size_t           categorical = 2;
    std::vector<int>      levels{4}; // one entry per categorical variable, or a single shared value
    double                overlap_continuous = 0.3;
    double                overlap_categorical = 0.3;
    Balance               balance = Balance::equal;
    std::uint64_t         seed = 0;
    std::optional<double> separation; // overrides the gap derived from overlap_continuous
    std::size_t           clusters = 2;

    [[nodiscard]] int levels_for(std::size_t d) const { return levels.size() == 1 ? levels.front() : levels.at(d); }

    void validate() const {
        require(n >= 4, "invalid_argument", "generator needs n >= 4");
        require(continuous + categorical >= 1, "invalid_argument", "generator needs at least one variable");
        require(categorical == 0 || levels.size() == 1 || levels.size() == categorical, "invalid_argument",
                "levels must have one entry or one per categorical variable");
        for (std::size_t d = 0; d < categorical; ++d) {
            require(levels_for(d) >= 2, "invalid_argument", "categorical variables need at least 2 levels");
        }
        require(overlap_continuous > 0.0 && overlap_continuous < 1.0 && overlap_categorical > 0.0 &&
                    overlap_categorical < 1.0,
                "invalid_argument", "overlaps must lie in (0, 1)");
        require(!separation || (std::isfinite(*separation) && *separation >= 0.0), "invalid_argument",
                "separation must be finite and >= 0");
        require(clusters >= 2 && clusters <= n, "invalid_argument", "clusters must satisfy 2 <= clusters <= n");
        require(clusters == 2 || balance == Balance::equal, "invalid_argument",
                "imbalanced sizes are defined for 2 clusters only");
    }
};

struct LabeledDataset {
    MixedDataset                   data;
    Partition                      truth;
    double                         separation = 0.0;
    std::vector<CategoricalMasses> masses; // per categorical variable (2-cluster form)
};

/// Cluster sizes: equal puts floor(n/2) in the first cluster; imbalanced
/// puts floor(n/4) in the first and the rest in the second.
inline std::vector<std::size_t> cluster_sizes(const GenSpec& spec) {
    if (spec.clusters > 2) {
        std::vector<std::size_t> sizes(spec.clusters, spec.n / spec.clusters);
        sizes.back() += spec.n % spec.clusters;
        return sizes;
    }
    const std::size_t first = spec.balance == Balance::equal ? spec.n / 2 : spec.n / 4;
    return {first, spec.n - first};
}

inline LabeledDataset generate(const GenSpec& spec) {
    spec.validate();
    const double gap = spec.separation ? *spec.separation : continuous_separation(spec.overlap_continuous);

    std::vector<VariableSchema> schema;
    for (std::size_t c = 0; c < spec.continuous; ++c) {
        schema.push_back({"x" + std::to_string(c + 1), VariableKind::continuous, {}});
    }
    for (std::size_t d = 0; d < spec.categorical; ++d) {
        VariableSchema var{"z" + std::to_string(d + 1), VariableKind::categorical, {}};
        for (int l = 0; l < spec.levels_for(d); ++l) {
            var.levels.push_back(std::to_string(l + 1));
        }
        schema.push_back(std::move(var));
    }

    LabeledDataset out;
    out.separation = gap;
    for (std::size_t d = 0; d < spec.categorical; ++d) {
        out.masses.push_back(categorical_masses(spec.overlap_categorical, spec.levels_for(d)));
    }

    const auto sizes = cluster_sizes(spec);
    for (std::size_t t = 0; t < sizes.size(); ++t) {
        out.truth.insert(out.truth.end(), sizes[t], static_cast<int>(t));
    }

    std::mt19937_64                  rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Matrix<double>                   cont(spec.n, spec.continuous);
    Matrix<int>                      cat(spec.n, spec.categorical);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto label = static_cast<std::size_t>(out.truth[i]);
        for (std::size_t c = 0; c < spec.continuous; ++c) {
            cont(i, c) = static_cast<double>(label) * gap + noise(rng);
        }
        for (std::size_t d = 0; d < spec.categorical; ++d) {
            const int           levels = spec.levels_for(d);
            std::vector<double> probs;
            if (spec.clusters == 2) {
                probs = label == 0 ? out.masses[d].first : out.masses[d].second;
            } else {
                probs.assign(static_cast<std::size_t>(levels), spec.overlap_categorical / levels);
                probs[label % static_cast<std::size_t>(levels)] += 1.0 - spec.overlap_categorical;
            }
            std::discrete_distribution<int> pick(probs.begin(), probs.end());
            cat(i, d) = pick(rng);
        }
    }
    out.data = MixedDataset(std::move(schema), std::move(cont), std::move(cat));
    return out;
}

} // namespace dibmix
