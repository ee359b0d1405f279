#pragma once

#include "dibmix/dataset.hpp"
#include "dibmix/error.hpp"
#include "dibmix/infotheory.hpp"
#include "dibmix/kernels.hpp"
#include "dibmix/matrix.hpp"
#include "dibmix/parallel.hpp"
#include "dibmix/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace dibmix {

/// Deterministic encoder q(t|x) stored as a label per observation
/// (0-based), with cluster masses q(t) and decoder rows q(y|t).
/// Decoder rows of empty clusters are all zero.
struct Encoder {
    std::vector<int>    assign;
    std::vector<double> masses;
    Matrix<double>      decoder;

    [[nodiscard]] std::size_t k() const noexcept { return masses.size(); }

    [[nodiscard]] int effective_k() const noexcept {
        int count = 0;
        for (double m : masses) {
            count += m > 0.0 ? 1 : 0;
        }
        return count;
    }
};

/// Rebuilds masses and decoder from an assignment:
/// q(t) = sum_{x in t} p(x), q(y|t) = sum_{x in t} p(x) p(y|x) / q(t).
inline Encoder make_encoder(std::vector<int> assign, std::size_t k, const ConditionalDensity& density,
                            std::span<const double> weights) {
    const std::size_t n = density.size();
    require(assign.size() == n && weights.size() == n, "invalid_argument", "encoder size mismatch");
    Encoder enc{std::move(assign), std::vector<double>(k, 0.0), Matrix<double>(k, n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = static_cast<std::size_t>(enc.assign[i]);
        require(t < k, "invalid_argument", "cluster label out of range");
        enc.masses[t] += weights[i];
        auto       dst = enc.decoder.row(t);
        const auto src = density.row(i);
        for (std::size_t y = 0; y < n; ++y) {
            dst[y] += weights[i] * src[y];
        }
    }
    for (std::size_t t = 0; t < k; ++t) {
        if (enc.masses[t] > 0.0) {
            for (double& v : enc.decoder.row(t)) {
                v /= enc.masses[t];
            }
        }
    }
    return enc;
}

/// Independent uniform labels in [0, k).
inline std::vector<int> random_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
    require(k >= 1 && k <= n, "invalid_argument",
            "k must satisfy 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    std::mt19937_64                    rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(k) - 1);
    std::vector<int>                   labels(n);
    for (auto& l : labels) {
        l = pick(rng);
    }
    return labels;
}

inline Encoder init_random(const ConditionalDensity& density, std::span<const double> weights, std::size_t k,
                           std::uint64_t seed) {
    return make_encoder(random_assignment(density.size(), k, seed), k, density, weights);
}

struct ObjectiveValue {
    double objective = 0.0;   // H(T) - beta I(T;Y)
    double compression = 0.0; // H(T)
    double relevance = 0.0;   // I(T;Y)
};

/// H(T) - beta I(T;Y) with q(t,y) = q(t) q(y|t).
inline ObjectiveValue objective(const Encoder& enc, double beta) {
    std::vector<double> nonempty;
    for (double m : enc.masses) {
        if (m > 0.0) {
            nonempty.push_back(m);
        }
    }
    Matrix<double> joint(nonempty.size(), enc.decoder.cols());
    for (std::size_t t = 0, r = 0; t < enc.k(); ++t) {
        if (enc.masses[t] <= 0.0) {
            continue;
        }
        const auto src = enc.decoder.row(t);
        for (std::size_t y = 0; y < src.size(); ++y) {
            joint(r, y) = enc.masses[t] * src[y];
        }
        ++r;
    }
    ObjectiveValue out;
    // One nonempty cluster has q(t) = 1 exactly, whatever the weights sum to.
    out.compression = nonempty.size() > 1 ? info::entropy(nonempty) : 0.0;
    out.relevance = nonempty.size() > 1 ? info::mutual_information(joint) : 0.0;
    out.objective = out.compression - beta * out.relevance;
    return out;
}

namespace detail {

// sum_y p(y|x) log p(y|x) for each row; the x-only part of every KL term.
inline std::vector<double> row_neg_entropy(const ConditionalDensity& density) {
    std::vector<double> out(density.size(), 0.0);
    for (std::size_t i = 0; i < density.size(); ++i) {
        for (double p : density.row(i)) {
            if (p > 0.0) {
                out[i] += p * std::log(p);
            }
        }
    }
    return out;
}

inline Encoder dib_step(const Encoder& enc, const ConditionalDensity& density, std::span<const double> weights,
                        std::span<const double> neg_entropy, double beta) {
    constexpr double  neg_inf = -std::numeric_limits<double>::infinity();
    const std::size_t n = density.size();
    const std::size_t k = enc.k();

    std::vector<double> log_mass(k, neg_inf);
    Matrix<double>      log_decoder(k, n, neg_inf);
    for (std::size_t t = 0; t < k; ++t) {
        if (enc.masses[t] <= 0.0) {
            continue;
        }
        log_mass[t] = std::log(enc.masses[t]);
        const auto src = enc.decoder.row(t);
        auto       dst = log_decoder.row(t);
        for (std::size_t y = 0; y < n; ++y) {
            dst[y] = src[y] > 0.0 ? std::log(src[y]) : neg_inf;
        }
    }

    std::vector<int> next(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = density.row(i);
        double     best = neg_inf;
        int        best_t = -1;
        for (std::size_t t = 0; t < k; ++t) {
            if (log_mass[t] == neg_inf) {
                continue;
            }
            double score = log_mass[t];
            // beta = 0 drops the divergence entirely (0 * inf is not -inf).
            if (beta > 0.0) {
                const auto lq = log_decoder.row(t);
                double     cross = 0.0;
                for (std::size_t y = 0; y < n; ++y) {
                    if (p[y] > 0.0) {
                        cross += p[y] * lq[y];
                    }
                }
                const double kl = neg_entropy[i] - cross; // +inf when q(.|t) misses support of p(.|x)
                score -= beta * kl;
            }
            if (score > best) {
                best = score;
                best_t = static_cast<int>(t);
            }
        }
        require(best_t >= 0, "degenerate_smoothing",
                "observation " + std::to_string(i) + " has infinite divergence to every cluster",
                ErrorKind::numerical);
        next[i] = best_t;
    }
    return make_encoder(std::move(next), k, density, weights);
}

} // namespace detail

/// One synchronous DIB update: every x moves to
/// argmax_t log q(t) - beta KL(p(.|x) || q(.|t)) computed from the previous
/// encoder (ties to the smallest index), then q(t) and q(y|t) are rebuilt.
inline Encoder dib_step(const Encoder& enc, const ConditionalDensity& density, double beta,
                        std::span<const double> weights) {
    require(enc.assign.size() == density.size(), "invalid_argument", "encoder does not match density size");
    const auto neg_entropy = detail::row_neg_entropy(density);
    return detail::dib_step(enc, density, weights, neg_entropy, beta);
}

struct DibOptions {
    std::size_t   k = 2;
    double        beta = 100.0;
    int           restarts = 100;
    int           max_iter = 100;
    std::uint64_t seed = 0;
    unsigned      threads = 1;
};

struct RestartSummary {
    int           restart = 0;
    std::uint64_t seed = 0;
    double        objective = 0.0;
    double        compression = 0.0;
    double        relevance = 0.0;
    int           iterations = 0;
    int           effective_k = 0;
    bool          converged = false;
    bool          objective_increase = false;
};

struct DibResult {
    Encoder                     encoder;
    double                      objective = 0.0;
    double                      relevance = 0.0;
    double                      compression = 0.0;
    int                         iterations = 0;
    std::vector<double>         objective_trace;
    int                         effective_k = 0;
    int                         restart_index = 0;
    std::uint64_t               seed = 0;
    bool                        converged = false;
    bool                        objective_increase = false;
    std::vector<RestartSummary> restarts;
};

namespace detail {

struct ChainResult {
    Encoder             encoder;
    ObjectiveValue      value;
    std::vector<double> trace;
    int                 iterations = 0;
    bool                converged = false;
    bool                objective_increase = false;
};

// Iterates until the assignment is unchanged or max_iter is reached. An
// objective increase ends the chain with the encoder before the increase.
inline ChainResult run_chain(const ConditionalDensity& density, std::span<const double> weights,
                             std::span<const double> neg_entropy, const DibOptions& opts, std::uint64_t seed) {
    ChainResult chain;
    chain.encoder = init_random(density, weights, opts.k, seed);
    chain.value = objective(chain.encoder, opts.beta);
    for (int it = 0; it < opts.max_iter; ++it) {
        Encoder next = detail::dib_step(chain.encoder, density, weights, neg_entropy, opts.beta);
        const auto value = objective(next, opts.beta);
        ++chain.iterations;
        chain.trace.push_back(value.objective);
        if (next.assign == chain.encoder.assign) {
            chain.converged = true;
            break;
        }
        if (value.objective > chain.value.objective + 1e-12 * (1.0 + std::abs(chain.value.objective))) {
            chain.objective_increase = true;
            break;
        }
        chain.encoder = std::move(next);
        chain.value = value;
    }
    return chain;
}

} // namespace detail

/// Best of `restarts` DIB chains by H(T) - beta I(T;Y), ties to the lower
/// restart index. Restart r is seeded with derive_seed(opts.seed, r) and
/// the result does not depend on opts.threads.
inline DibResult dib_fit(const ConditionalDensity& density, std::span<const double> weights, const DibOptions& opts) {
    require(opts.restarts >= 1, "invalid_argument", "restarts must be >= 1");
    require(opts.max_iter >= 1, "invalid_argument", "max_iter must be >= 1");
    require(opts.beta >= 0.0 && std::isfinite(opts.beta), "invalid_argument", "beta must be finite and >= 0");
    require(opts.k >= 1 && opts.k <= density.size(), "invalid_argument",
            "k must satisfy 1 <= k <= n (k=" + std::to_string(opts.k) + ", n=" + std::to_string(density.size()) +
                ")");

    const auto neg_entropy = detail::row_neg_entropy(density);
    const auto count = static_cast<std::size_t>(opts.restarts);
    std::vector<std::optional<detail::ChainResult>> chains(count);
    parallel_for(count, opts.threads, [&](std::size_t r) {
        chains[r] = detail::run_chain(density, weights, neg_entropy, opts, derive_seed(opts.seed, r));
    });

    DibResult   result;
    std::size_t best = 0;
    for (std::size_t r = 0; r < count; ++r) {
        const auto& c = *chains[r];
        result.restarts.push_back({static_cast<int>(r), derive_seed(opts.seed, r), c.value.objective,
                                   c.value.compression, c.value.relevance, c.iterations, c.encoder.effective_k(),
                                   c.converged, c.objective_increase});
        if (c.value.objective < chains[best]->value.objective) {
            best = r;
        }
    }
    auto& winner = *chains[best];
    result.encoder = std::move(winner.encoder);
    result.objective = winner.value.objective;
    result.relevance = winner.value.relevance;
    result.compression = winner.value.compression;
    result.iterations = winner.iterations;
    result.objective_trace = std::move(winner.trace);
    result.effective_k = result.encoder.effective_k();
    result.restart_index = static_cast<int>(best);
    result.seed = derive_seed(opts.seed, best);
    result.converged = winner.converged;
    result.objective_increase = winner.objective_increase;
    return result;
}

inline DibResult dib_fit(const MixedDataset& ds, const Bandwidths& bw, const DibOptions& opts,
                         const DensityOptions& density_opts = {}) {
    const auto density = estimate_conditional(ds, bw, density_opts);
    return dib_fit(density, ds.weights(), opts);
}

struct SweepRow {
    double beta = 0.0;
    double compression = 0.0;
    double relevance = 0.0;
    double objective = 0.0;
    int    effective_k = 0;
};

/// Runs dib_fit once per beta with identical seeds.
inline std::vector<SweepRow> beta_sweep(const ConditionalDensity& density, std::span<const double> weights,
                                        std::span<const double> betas, DibOptions opts) {
    require(!betas.empty(), "invalid_argument", "beta list is empty");
    std::vector<SweepRow> rows;
    for (double beta : betas) {
        require(beta >= 0.0, "invalid_argument", "beta values must be >= 0");
        opts.beta = beta;
        const auto fit = dib_fit(density, weights, opts);
        rows.push_back({beta, fit.compression, fit.relevance, fit.objective, fit.effective_k});
    }
    return rows;
}

/// Beta at the interior point where I(T;Y) has the largest absolute second
/// divided difference. The abscissa is log(beta) when every beta is
/// positive (sweeps are usually log-spaced) and beta otherwise. Needs at
/// least 3 distinct betas.
inline std::optional<double> max_curvature_beta(std::vector<SweepRow> rows) {
    std::ranges::sort(rows, {}, &SweepRow::beta);
    const bool log_axis = !rows.empty() && rows.front().beta > 0.0;
    auto       axis = [&](double beta) { return log_axis ? std::log(beta) : beta; };

    std::optional<double> best_beta;
    double                best = -1.0;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const double h0 = axis(rows[i].beta) - axis(rows[i - 1].beta);
        const double h1 = axis(rows[i + 1].beta) - axis(rows[i].beta);
        if (h0 <= 0.0 || h1 <= 0.0) {
            continue;
        }
        const double slope0 = (rows[i].relevance - rows[i - 1].relevance) / h0;
        const double slope1 = (rows[i + 1].relevance - rows[i].relevance) / h1;
        const double second = std::abs(2.0 * (slope1 - slope0) / (h0 + h1));
        if (second > best) {
            best = second;
            best_beta = rows[i].beta;
        }
    }
    return best_beta;
}

} // namespace dibmix
