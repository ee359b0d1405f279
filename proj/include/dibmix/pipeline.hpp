#pragma once

// End-to-end runs shared by the command-line tool and the benchmark:
// preprocessing, bandwidth choice, fitting and JSON serialization.

#include "dibmix/bandwidth.hpp"
#include "dibmix/baselines.hpp"
#include "dibmix/dataset.hpp"
#include "dibmix/datagen.hpp"
#include "dibmix/dib.hpp"
#include "dibmix/kernels.hpp"
#include "dibmix/metrics.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dibmix {

inline constexpr const char* version = "0.1.0";

struct ClusterConfig {
    DibOptions     dib;
    BalanceSpec    balance;
    bool           standardize = true;
    DensityOptions density;
};

struct ClusterRun {
    MixedDataset                   data; // after preprocessing
    Bandwidths                     bandwidths;
    std::optional<LambdaSelection> selection;
    ConditionalDensity             density;
    DibResult                      result;
};

inline MixedDataset prepare(const MixedDataset& ds, bool standardize_continuous) {
    return standardize_continuous ? standardize(ds) : ds;
}

/// standardize -> bandwidth selection (unless overridden) -> p(y|x) -> DIB.
inline ClusterRun run_cluster(const MixedDataset& raw, const ClusterConfig& cfg) {
    ClusterRun run;
    run.data = prepare(raw, cfg.standardize);
    auto choice = select_bandwidths(run.data, cfg.balance);
    run.bandwidths = std::move(choice.bandwidths);
    run.selection = std::move(choice.selection);
    auto density_opts = cfg.density;
    density_opts.threads = std::max(density_opts.threads, cfg.dib.threads);
    run.density = estimate_conditional(run.data, run.bandwidths, density_opts);
    run.result = dib_fit(run.density, run.data.weights(), cfg.dib);
    return run;
}

inline int distinct_labels(const Partition& labels) {
    return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Bandwidths& bw) {
    return {{"s", bw.s}, {"lambda", bw.lambda}};
}

inline nlohmann::json to_json(const LambdaSelection& sel) {
    return {{"alpha", sel.alpha},           {"target_variance", sel.target}, {"achieved_variance", sel.achieved},
            {"iterations", sel.iterations}, {"clamped", sel.clamped},        {"degenerate", sel.degenerate},
            {"no_continuous", sel.no_continuous}};
}

inline nlohmann::json to_json(const DibResult& r) {
    nlohmann::json restarts = nlohmann::json::array();
    for (const auto& s : r.restarts) {
        restarts.push_back({{"restart", s.restart},
                            {"seed", s.seed},
                            {"objective", s.objective},
                            {"H", s.compression},
                            {"I", s.relevance},
                            {"iterations", s.iterations},
                            {"effective_k", s.effective_k},
                            {"converged", s.converged},
                            {"objective_increase", s.objective_increase}});
    }
    return {{"assignment", r.encoder.assign},
            {"masses", r.encoder.masses},
            {"H", r.compression},
            {"I", r.relevance},
            {"objective", r.objective},
            {"effective_k", r.effective_k},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"objective_increase", r.objective_increase},
            {"restart_index", r.restart_index},
            {"seed", r.seed},
            {"objective_trace", r.objective_trace},
            {"restarts", restarts}};
}

inline nlohmann::json to_json(const GenSpec& spec) {
    nlohmann::json j{{"n", spec.n},
                     {"p_c", spec.continuous},
                     {"p_d", spec.categorical},
                     {"levels", spec.levels},
                     {"overlap_continuous", spec.overlap_continuous},
                     {"overlap_categorical", spec.overlap_categorical},
                     {"balance", to_string(spec.balance)},
                     {"seed", spec.seed},
                     {"clusters", spec.clusters}};
    if (spec.separation) {
        j["separation_override"] = *spec.separation;
    }
    return j;
}

/// Error JSON emitted by the CLI on failure.
inline nlohmann::json error_json(const std::string& code, const std::string& message) {
    return {{"status", "error"}, {"error", {{"code", code}, {"message", message}}}};
}

} // namespace dibmix
