#pragma once

#include "dibmix/dataset.hpp"
#include "dibmix/error.hpp"
#include "dibmix/matrix.hpp"
#include "dibmix/metrics.hpp"
#include "dibmix/parallel.hpp"
#include "dibmix/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace dibmix {

// ---------------------------------------------------------------------------
// Gower dissimilarity

struct GowerMatrix {
    Matrix<double>      d;
    std::vector<double> ranges; // per continuous variable

    [[nodiscard]] std::size_t size() const noexcept { return d.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return d(i, j); }
};

/// Range-normalized absolute differences on continuous variables and
/// simple mismatch on categorical ones, averaged over all p variables.
inline GowerMatrix gower(const MixedDataset& ds) {
    const std::size_t n = ds.size();
    const std::size_t pc = ds.continuous_count();
    const std::size_t pd = ds.categorical_count();
    const auto&       x = ds.continuous();
    const auto&       cat = ds.categorical();

    GowerMatrix out{Matrix<double>(n, n, 0.0), std::vector<double>(pc, 0.0)};
    for (std::size_t c = 0; c < pc; ++c) {
        double lo = x(0, c);
        double hi = x(0, c);
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, x(i, c));
            hi = std::max(hi, x(i, c));
        }
        out.ranges[c] = hi - lo;
        require(out.ranges[c] > 0.0, "zero_range",
                "continuous column '" + ds.continuous_variable(c).name + "' has zero range");
    }
    const double p = static_cast<double>(pc + pd);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t c = 0; c < pc; ++c) {
                sum += std::abs(x(i, c) - x(j, c)) / out.ranges[c];
            }
            for (std::size_t d = 0; d < pd; ++d) {
                sum += cat(i, d) != cat(j, d) ? 1.0 : 0.0;
            }
            out.d(i, j) = out.d(j, i) = sum / p;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// PAM (BUILD + SWAP)

struct PamOptions {
    std::size_t   k = 2;
    int           restarts = 1; // restart 0 is BUILD, later ones start from random medoids
    int           max_iter = 100;
    std::uint64_t seed = 0;
    unsigned      threads = 1;
};

struct PamResult {
    Partition                labels;
    std::vector<std::size_t> medoids; // ascending
    double                   cost = 0.0;
    int                      iterations = 0; // accepted swaps
    int                      restart_index = 0;
    std::uint64_t            seed = 0;
    std::vector<double>      cost_trace;     // cost after BUILD and after every accepted swap
};

template <typename Dissimilarity>
double medoid_cost(const Dissimilarity& d, std::span<const std::size_t> medoids) {
    double total = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (auto m : medoids) {
            best = std::min(best, d(j, m));
        }
        total += best;
    }
    return total;
}

namespace detail {

inline std::vector<std::size_t> pam_build(const GowerMatrix& d, std::size_t k) {
    const std::size_t n = d.size();
    std::vector<std::size_t> medoids;
    std::vector<double>      nearest(n, std::numeric_limits<double>::infinity());
    std::vector<char>        chosen(n, 0);

    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = n;
        double      best_score = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (chosen[c]) {
                continue;
            }
            // First medoid minimizes total dissimilarity; later ones maximize the cost reduction.
            double score = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                score += step == 0 ? -d(j, c) : std::max(nearest[j] - d(j, c), 0.0);
            }
            if (best == n || score > best_score) {
                best = c;
                best_score = score;
            }
        }
        chosen[best] = 1;
        medoids.push_back(best);
        for (std::size_t j = 0; j < n; ++j) {
            nearest[j] = std::min(nearest[j], d(j, best));
        }
    }
    return medoids;
}

inline PamResult pam_swap(const GowerMatrix& d, std::vector<std::size_t> medoids, int max_iter) {
    const std::size_t n = d.size();
    const std::size_t k = medoids.size();
    constexpr double  inf = std::numeric_limits<double>::infinity();

    PamResult out;
    std::vector<double> first(n);
    std::vector<double> second(n);
    std::vector<std::size_t> owner(n);
    std::vector<char>   is_medoid(n, 0);

    auto refresh = [&] {
        std::fill(is_medoid.begin(), is_medoid.end(), 0);
        for (auto m : medoids) {
            is_medoid[m] = 1;
        }
        for (std::size_t j = 0; j < n; ++j) {
            first[j] = second[j] = inf;
            for (std::size_t s = 0; s < k; ++s) {
                const double v = d(j, medoids[s]);
                if (v < first[j]) {
                    second[j] = first[j];
                    first[j] = v;
                    owner[j] = s;
                } else if (v < second[j]) {
                    second[j] = v;
                }
            }
        }
    };
    auto total = [&] { return std::accumulate(first.begin(), first.end(), 0.0); };

    refresh();
    out.cost = total();
    out.cost_trace.push_back(out.cost);
    while (out.iterations < max_iter) {
        double      best_delta = 0.0;
        std::size_t best_slot = k;
        std::size_t best_h = n;
        for (std::size_t s = 0; s < k; ++s) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) {
                    continue;
                }
                double delta = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double djh = d(j, h);
                    const double now = owner[j] == s ? std::min(djh, second[j]) : std::min(djh, first[j]);
                    delta += now - first[j];
                }
                if (delta < best_delta) {
                    best_delta = delta;
                    best_slot = s;
                    best_h = h;
                }
            }
        }
        if (best_slot == k || best_delta >= -1e-12 * std::max(1.0, out.cost)) {
            break;
        }
        medoids[best_slot] = best_h;
        refresh();
        out.cost = total();
        out.cost_trace.push_back(out.cost);
        ++out.iterations;
    }

    std::ranges::sort(medoids);
    out.labels.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        double best = inf;
        for (std::size_t s = 0; s < k; ++s) {
            if (d(j, medoids[s]) < best) {
                best = d(j, medoids[s]);
                out.labels[j] = static_cast<int>(s);
            }
        }
    }
    out.medoids = std::move(medoids);
    return out;
}

} // namespace detail

/// k-medoids by BUILD then steepest-descent SWAP; a swap is taken only if it
/// strictly lowers the total dissimilarity. Best of restarts by cost.
inline PamResult pam_fit(const GowerMatrix& d, const PamOptions& opts) {
    const std::size_t n = d.size();
    require(opts.k >= 1 && opts.k <= n, "invalid_argument",
            "k must satisfy 1 <= k <= n (k=" + std::to_string(opts.k) + ", n=" + std::to_string(n) + ")");
    require(opts.restarts >= 1, "invalid_argument", "restarts must be >= 1");
    require(opts.max_iter >= 0, "invalid_argument", "max_iter must be >= 0");

    const auto count = static_cast<std::size_t>(opts.restarts);
    std::vector<PamResult> runs(count);
    parallel_for(count, opts.threads, [&](std::size_t r) {
        const auto seed = derive_seed(opts.seed, r);
        std::vector<std::size_t> start;
        if (r == 0) {
            start = detail::pam_build(d, opts.k);
        } else {
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::mt19937_64 rng(seed);
            std::shuffle(perm.begin(), perm.end(), rng);
            start.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(opts.k));
        }
        runs[r] = detail::pam_swap(d, std::move(start), opts.max_iter);
        runs[r].restart_index = static_cast<int>(r);
        runs[r].seed = seed;
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < count; ++r) {
        if (runs[r].cost < runs[best].cost) {
            best = r;
        }
    }
    return std::move(runs[best]);
}

// ---------------------------------------------------------------------------
// K-Prototypes (Huang)

struct Prototype {
    std::vector<double> centroid; // continuous means
    std::vector<int>    modes;    // categorical level codes
};

struct KPrototypesOptions {
    std::size_t           k = 2;
    std::optional<double> gamma; // default: mean sample variance of the continuous columns
    int                   restarts = 100;
    int                   max_iter = 100;
    std::uint64_t         seed = 0;
    unsigned              threads = 1;
};

struct KPrototypesResult {
    Partition              labels;
    std::vector<Prototype> prototypes;
    double                 gamma = 1.0;
    double                 objective = 0.0;
    int                    iterations = 0;
    bool                   converged = false;
    int                    restart_index = 0;
    std::uint64_t          seed = 0;
    std::vector<double>    objective_trace;
};

/// Huang's heuristic for the categorical weight.
inline double default_gamma(const MixedDataset& ds) {
    if (ds.continuous_count() == 0 || ds.size() < 2) {
        return 1.0;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < ds.continuous_count(); ++c) {
        total += column_moments(ds.continuous(), c).variance;
    }
    return total / static_cast<double>(ds.continuous_count());
}

inline double prototype_distance(const MixedDataset& ds, std::size_t i, const Prototype& proto, double gamma) {
    double dist = 0.0;
    for (std::size_t c = 0; c < ds.continuous_count(); ++c) {
        const double diff = ds.continuous()(i, c) - proto.centroid[c];
        dist += diff * diff;
    }
    int mismatches = 0;
    for (std::size_t d = 0; d < ds.categorical_count(); ++d) {
        mismatches += ds.categorical()(i, d) != proto.modes[d] ? 1 : 0;
    }
    return dist + gamma * static_cast<double>(mismatches);
}

inline double kprototypes_objective(const MixedDataset& ds, const Partition& labels,
                                    const std::vector<Prototype>& protos, double gamma) {
    double total = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        total += prototype_distance(ds, i, protos[static_cast<std::size_t>(labels[i])], gamma);
    }
    return total;
}

namespace detail {

inline Prototype prototype_of_row(const MixedDataset& ds, std::size_t i) {
    Prototype p;
    const auto cont = ds.continuous().row(i);
    const auto cat = ds.categorical().row(i);
    p.centroid.assign(cont.begin(), cont.end());
    p.modes.assign(cat.begin(), cat.end());
    return p;
}

// Means and modes (smallest level on ties); empty clusters keep their prototype.
inline void update_prototypes(const MixedDataset& ds, const Partition& labels, std::vector<Prototype>& protos) {
    const std::size_t k = protos.size();
    std::vector<std::size_t> size(k, 0);
    std::vector<std::vector<double>> sums(k, std::vector<double>(ds.continuous_count(), 0.0));
    std::vector<std::vector<std::vector<int>>> counts(k);
    for (std::size_t t = 0; t < k; ++t) {
        counts[t].resize(ds.categorical_count());
        for (std::size_t d = 0; d < ds.categorical_count(); ++d) {
            counts[t][d].assign(static_cast<std::size_t>(ds.levels(d)), 0);
        }
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto t = static_cast<std::size_t>(labels[i]);
        ++size[t];
        for (std::size_t c = 0; c < ds.continuous_count(); ++c) {
            sums[t][c] += ds.continuous()(i, c);
        }
        for (std::size_t d = 0; d < ds.categorical_count(); ++d) {
            ++counts[t][d][static_cast<std::size_t>(ds.categorical()(i, d))];
        }
    }
    for (std::size_t t = 0; t < k; ++t) {
        if (size[t] == 0) {
            continue;
        }
        for (std::size_t c = 0; c < ds.continuous_count(); ++c) {
            protos[t].centroid[c] = sums[t][c] / static_cast<double>(size[t]);
        }
        for (std::size_t d = 0; d < ds.categorical_count(); ++d) {
            const auto& cnt = counts[t][d];
            protos[t].modes[d] = static_cast<int>(std::distance(cnt.begin(), std::ranges::max_element(cnt)));
        }
    }
}

inline KPrototypesResult kprototypes_chain(const MixedDataset& ds, std::size_t k, double gamma, int max_iter,
                                           std::uint64_t seed) {
    const std::size_t n = ds.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    KPrototypesResult out;
    out.gamma = gamma;
    out.seed = seed;
    for (std::size_t t = 0; t < k; ++t) {
        out.prototypes.push_back(prototype_of_row(ds, perm[t]));
    }
    out.labels.assign(n, -1);

    std::vector<double> dist(n);
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        std::vector<std::size_t> size(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            // Stay put on ties so the objective cannot increase through relabeling.
            int    best = out.labels[i];
            double best_d = best >= 0 ? prototype_distance(ds, i, out.prototypes[static_cast<std::size_t>(best)], gamma)
                                      : std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < k; ++t) {
                const double v = prototype_distance(ds, i, out.prototypes[t], gamma);
                if (v < best_d) {
                    best_d = v;
                    best = static_cast<int>(t);
                }
            }
            changed = changed || best != out.labels[i];
            out.labels[i] = best;
            dist[i] = best_d;
            ++size[static_cast<std::size_t>(best)];
        }

        // Reseed empty clusters with the point farthest from its prototype.
        for (std::size_t t = 0; t < k; ++t) {
            if (size[t] != 0) {
                continue;
            }
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (size[static_cast<std::size_t>(out.labels[i])] > 1 && dist[i] > 0.0 && (far == n || dist[i] > dist[far])) {
                    far = i;
                }
            }
            if (far == n) {
                continue;
            }
            --size[static_cast<std::size_t>(out.labels[far])];
            out.labels[far] = static_cast<int>(t);
            size[t] = 1;
            dist[far] = 0.0;
            out.prototypes[t] = prototype_of_row(ds, far);
            changed = true;
        }

        update_prototypes(ds, out.labels, out.prototypes);
        out.objective = kprototypes_objective(ds, out.labels, out.prototypes, gamma);
        out.objective_trace.push_back(out.objective);
        ++out.iterations;
        if (!changed) {
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace detail

/// Alternating assignment / mean-and-mode update minimizing
/// sum_i ||x_i^c - proto^c||^2 + gamma * #mismatches(x_i^d, proto^d).
inline KPrototypesResult kprototypes_fit(const MixedDataset& ds, const KPrototypesOptions& opts) {
    require(opts.k >= 1 && opts.k <= ds.size(), "invalid_argument",
            "k must satisfy 1 <= k <= n (k=" + std::to_string(opts.k) + ", n=" + std::to_string(ds.size()) + ")");
    require(opts.restarts >= 1 && opts.max_iter >= 1, "invalid_argument", "restarts and max_iter must be >= 1");
    const double gamma = opts.gamma ? *opts.gamma : default_gamma(ds);
    require(gamma >= 0.0, "invalid_argument", "gamma must be >= 0");

    const auto count = static_cast<std::size_t>(opts.restarts);
    std::vector<KPrototypesResult> runs(count);
    parallel_for(count, opts.threads, [&](std::size_t r) {
        runs[r] = detail::kprototypes_chain(ds, opts.k, gamma, opts.max_iter, derive_seed(opts.seed, r));
        runs[r].restart_index = static_cast<int>(r);
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < count; ++r) {
        if (runs[r].objective < runs[best].objective) {
            best = r;
        }
    }
    return std::move(runs[best]);
}

} // namespace dibmix
