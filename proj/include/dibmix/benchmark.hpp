#pragma once

#include "dibmix/baselines.hpp"
#include "dibmix/datagen.hpp"
#include "dibmix/dib.hpp"
#include "dibmix/error.hpp"
#include "dibmix/metrics.hpp"
#include "dibmix/parallel.hpp"
#include "dibmix/pipeline.hpp"
#include "dibmix/seeding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

namespace dibmix {

enum class Method { dibmix = 0, kproto = 1, pam = 2 };

inline std::string to_string(Method m) {
    switch (m) {
    case Method::dibmix: return "dibmix";
    case Method::kproto: return "kproto";
    case Method::pam: return "pam";
    }
    return "unknown";
}

inline Method parse_method(const std::string& s) {
    if (s == "dibmix" || s == "dib") {
        return Method::dibmix;
    }
    if (s == "kproto" || s == "kprototypes") {
        return Method::kproto;
    }
    require(s == "pam" || s == "gower", "invalid_argument", "unknown method '" + s + "'");
    return Method::pam;
}

struct BenchmarkCell {
    std::size_t n = 200;
    std::size_t continuous = 2;
    std::size_t categorical = 2;
    int         levels = 4;
    double      overlap_continuous = 0.3;
    double      overlap_categorical = 0.3;
    Balance     balance = Balance::equal;
};

/// Factor grid; the defaults are the full 3 x 2 x 2 x 3 x 2 x 2 x 2 design
/// (288 cells, 28,800 datasets at 100 replicates).
struct BenchmarkPlan {
    std::vector<std::size_t> sizes{200, 500, 1000};
    std::vector<std::size_t> continuous{2, 6};
    std::vector<std::size_t> categorical{2, 6};
    std::vector<int>         levels{2, 4, 6};
    std::vector<double>      overlap_continuous{0.3, 0.6};
    std::vector<double>      overlap_categorical{0.3, 0.6};
    std::vector<Balance>     balances{Balance::equal, Balance::imbalanced};
    int                      replicates = 100;
    std::vector<Method>      methods{Method::dibmix, Method::kproto, Method::pam};
    std::uint64_t            seed = 0;
    unsigned                 threads = 1;

    double beta = 100.0;
    int    restarts = 100;
    int    max_iter = 100;
    double categorical_weight = 1.0;
    double s_multiplier = 3.0;
    int    kproto_restarts = 100;
    int    pam_restarts = 1;

    void validate() const {
        require(replicates >= 1, "invalid_argument", "replicates must be >= 1");
        require(!methods.empty(), "invalid_argument", "no methods selected");
        require(!sizes.empty() && !continuous.empty() && !categorical.empty() && !levels.empty() &&
                    !overlap_continuous.empty() && !overlap_categorical.empty() && !balances.empty(),
                "invalid_argument", "benchmark grid is empty");
    }
};

inline std::vector<BenchmarkCell> benchmark_cells(const BenchmarkPlan& plan) {
    std::vector<BenchmarkCell> cells;
    for (auto n : plan.sizes)
        for (auto pc : plan.continuous)
            for (auto pd : plan.categorical)
                for (auto l : plan.levels)
                    for (auto oc : plan.overlap_continuous)
                        for (auto od : plan.overlap_categorical)
                            for (auto b : plan.balances)
                                cells.push_back({n, pc, pd, l, oc, od, b});
    return cells;
}

struct BenchmarkRow {
    std::size_t   cell = 0;
    int           replicate = 0;
    Method        method = Method::dibmix;
    BenchmarkCell factors;
    std::uint64_t data_seed = 0;
    std::uint64_t method_seed = 0;
    std::string   status = "ok";
    double        ari = std::numeric_limits<double>::quiet_NaN();
    int           effective_k = 0;
    double        runtime_seconds = 0.0; // not part of the deterministic results file
};

inline GenSpec spec_for(const BenchmarkCell& cell, std::uint64_t seed) {
    GenSpec spec;
    spec.n = cell.n;
    spec.continuous = cell.continuous;
    spec.categorical = cell.categorical;
    spec.levels = {cell.levels};
    spec.overlap_continuous = cell.overlap_continuous;
    spec.overlap_categorical = cell.overlap_categorical;
    spec.balance = cell.balance;
    spec.seed = seed;
    return spec;
}

/// Runs one method on one labeled dataset; threads = 1 inside.
inline void run_method(const BenchmarkPlan& plan, const LabeledDataset& data, BenchmarkRow& row) {
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto prepared = standardize(data.data);
        Partition  labels;
        switch (row.method) {
        case Method::dibmix: {
            ClusterConfig cfg;
            cfg.dib = {2, plan.beta, plan.restarts, plan.max_iter, row.method_seed, 1};
            cfg.balance.categorical_weight = plan.categorical_weight;
            cfg.balance.s_multiplier = plan.s_multiplier;
            cfg.standardize = false;
            auto run = run_cluster(prepared, cfg);
            labels = run.result.encoder.assign;
            break;
        }
        case Method::kproto: {
            KPrototypesOptions opts;
            opts.k = 2;
            opts.restarts = plan.kproto_restarts;
            opts.max_iter = plan.max_iter;
            opts.seed = row.method_seed;
            labels = kprototypes_fit(prepared, opts).labels;
            break;
        }
        case Method::pam: {
            PamOptions opts;
            opts.k = 2;
            opts.restarts = plan.pam_restarts;
            opts.max_iter = plan.max_iter;
            opts.seed = row.method_seed;
            labels = pam_fit(gower(data.data), opts).labels;
            break;
        }
        }
        row.ari = ari(data.truth, labels);
        row.effective_k = distinct_labels(labels);
        row.status = "ok";
    } catch (const Error& e) {
        row.status = "error:" + e.code();
    } catch (const std::exception&) {
        row.status = "error:internal";
    }
    row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// One row per (cell, replicate, method) in that order. Replicates run
/// concurrently; every seed comes from derive_seed on the master seed, so
/// the rows do not depend on the worker count.
inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkPlan& plan) {
    plan.validate();
    const auto        cells = benchmark_cells(plan);
    const std::size_t reps = static_cast<std::size_t>(plan.replicates);
    const std::size_t per_task = plan.methods.size();
    std::vector<BenchmarkRow> rows(cells.size() * reps * per_task);

    parallel_for(cells.size() * reps, plan.threads, [&](std::size_t task) {
        const std::size_t c = task / reps;
        const std::size_t r = task % reps;
        const auto cell_seed = derive_seed(plan.seed, c);
        const auto rep_seed = derive_seed(cell_seed, r);
        const auto data_seed = derive_seed(rep_seed, 0);

        std::optional<LabeledDataset> data;
        std::string                   gen_status = "ok";
        try {
            data = generate(spec_for(cells[c], data_seed));
        } catch (const Error& e) {
            gen_status = "error:" + e.code();
        }
        for (std::size_t m = 0; m < per_task; ++m) {
            auto& row = rows[task * per_task + m];
            row.cell = c;
            row.replicate = static_cast<int>(r);
            row.method = plan.methods[m];
            row.factors = cells[c];
            row.data_seed = data_seed;
            row.method_seed = derive_seed(rep_seed, 1 + static_cast<std::uint64_t>(plan.methods[m]));
            if (data) {
                run_method(plan, *data, row);
            } else {
                row.status = gen_status;
            }
        }
    });
    return rows;
}

inline std::string format_real(double v) {
    if (std::isnan(v)) {
        return "";
    }
    return detail::format_double(v);
}

inline void write_results_csv(const std::vector<BenchmarkRow>& rows, std::ostream& out) {
    out << "cell,replicate,method,n,p_c,p_d,levels,overlap_cont,overlap_cat,balance,data_seed,method_seed,status,"
           "ari,effective_k\n";
    for (const auto& r : rows) {
        out << r.cell << ',' << r.replicate << ',' << to_string(r.method) << ',' << r.factors.n << ','
            << r.factors.continuous << ',' << r.factors.categorical << ',' << r.factors.levels << ','
            << format_real(r.factors.overlap_continuous) << ',' << format_real(r.factors.overlap_categorical) << ','
            << to_string(r.factors.balance) << ',' << r.data_seed << ',' << r.method_seed << ',' << r.status << ','
            << format_real(r.ari) << ',' << r.effective_k << '\n';
    }
}

inline void write_timings_csv(const std::vector<BenchmarkRow>& rows, std::ostream& out) {
    out << "cell,replicate,method,runtime_seconds\n";
    for (const auto& r : rows) {
        out << r.cell << ',' << r.replicate << ',' << to_string(r.method) << ',' << format_real(r.runtime_seconds)
            << '\n';
    }
}

/// Parses a results file written by write_results_csv.
inline std::vector<BenchmarkRow> read_results_csv(const std::filesystem::path& path) {
    const auto table = read_csv_table(path);
    auto       col = [&](const char* name) {
        const auto idx = table.column_index(name);
        require(idx.has_value(), "parse_error", std::string("results file lacks column '") + name + "'");
        return *idx;
    };
    const auto c_cell = col("cell"), c_rep = col("replicate"), c_method = col("method"), c_n = col("n"),
               c_pc = col("p_c"), c_pd = col("p_d"), c_l = col("levels"), c_oc = col("overlap_cont"),
               c_od = col("overlap_cat"), c_bal = col("balance"), c_status = col("status"), c_ari = col("ari"),
               c_k = col("effective_k");
    std::vector<BenchmarkRow> rows;
    for (const auto& f : table.rows) {
        BenchmarkRow r;
        r.cell = std::stoul(f[c_cell]);
        r.replicate = std::stoi(f[c_rep]);
        r.method = parse_method(f[c_method]);
        r.factors = {std::stoul(f[c_n]), std::stoul(f[c_pc]), std::stoul(f[c_pd]), std::stoi(f[c_l]),
                     std::stod(f[c_oc]), std::stod(f[c_od]), parse_balance(f[c_bal])};
        r.status = f[c_status];
        r.ari = f[c_ari].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[c_ari]);
        r.effective_k = std::stoi(f[c_k]);
        rows.push_back(std::move(r));
    }
    return rows;
}

struct MethodSummary {
    Method      method = Method::dibmix;
    std::size_t runs = 0;
    std::size_t failures = 0;
    double      median = std::numeric_limits<double>::quiet_NaN();
    double      mean = std::numeric_limits<double>::quiet_NaN();
    double      q1 = std::numeric_limits<double>::quiet_NaN();
    double      q3 = std::numeric_limits<double>::quiet_NaN();
    double      min = std::numeric_limits<double>::quiet_NaN();
    double      max = std::numeric_limits<double>::quiet_NaN();
};

/// Linear-interpolation quantile of sorted values.
inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto   lo = static_cast<std::size_t>(std::floor(pos));
    const auto   hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::vector<MethodSummary> summarize_methods(const std::vector<BenchmarkRow>& rows) {
    std::map<Method, std::vector<double>> values;
    std::map<Method, MethodSummary>       out;
    for (const auto& r : rows) {
        auto& s = out[r.method];
        s.method = r.method;
        ++s.runs;
        if (r.status != "ok" || std::isnan(r.ari)) {
            ++s.failures;
            continue;
        }
        values[r.method].push_back(r.ari);
    }
    std::vector<MethodSummary> summary;
    for (auto& [m, s] : out) {
        auto& v = values[m];
        std::ranges::sort(v);
        if (!v.empty()) {
            double total = 0.0;
            for (double x : v) {
                total += x;
            }
            s.mean = total / static_cast<double>(v.size());
            s.median = quantile_sorted(v, 0.5);
            s.q1 = quantile_sorted(v, 0.25);
            s.q3 = quantile_sorted(v, 0.75);
            s.min = v.front();
            s.max = v.back();
        }
        summary.push_back(s);
    }
    return summary;
}

struct FactorSummary {
    std::string factor;
    std::string level;
    Method      method = Method::dibmix;
    std::size_t runs = 0;
    double      mean = std::numeric_limits<double>::quiet_NaN();
};

/// Mean ARI per (factor, level, method) over successful runs.
inline std::vector<FactorSummary> summarize_factors(const std::vector<BenchmarkRow>& rows) {
    using Key = std::tuple<std::string, std::string, Method>;
    std::map<Key, std::pair<double, std::size_t>> acc;
    for (const auto& r : rows) {
        if (r.status != "ok" || std::isnan(r.ari)) {
            continue;
        }
        const std::pair<std::string, std::string> levels[] = {
            {"n", std::to_string(r.factors.n)},
            {"p_c", std::to_string(r.factors.continuous)},
            {"p_d", std::to_string(r.factors.categorical)},
            {"levels", std::to_string(r.factors.levels)},
            {"overlap_cont", format_real(r.factors.overlap_continuous)},
            {"overlap_cat", format_real(r.factors.overlap_categorical)},
            {"balance", to_string(r.factors.balance)},
        };
        for (const auto& [factor, level] : levels) {
            auto& [sum, count] = acc[{factor, level, r.method}];
            sum += r.ari;
            ++count;
        }
    }
    std::vector<FactorSummary> out;
    for (const auto& [key, value] : acc) {
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), value.second,
                       value.first / static_cast<double>(value.second)});
    }
    return out;
}

inline void write_method_summary_csv(const std::vector<MethodSummary>& summary, std::ostream& out) {
    out << "method,runs,failures,median_ari,mean_ari,q1_ari,q3_ari,min_ari,max_ari\n";
    for (const auto& s : summary) {
        out << to_string(s.method) << ',' << s.runs << ',' << s.failures << ',' << format_real(s.median) << ','
            << format_real(s.mean) << ',' << format_real(s.q1) << ',' << format_real(s.q3) << ','
            << format_real(s.min) << ',' << format_real(s.max) << '\n';
    }
}

inline void write_factor_summary_csv(const std::vector<FactorSummary>& summary, std::ostream& out) {
    out << "factor,level,method,runs,mean_ari\n";
    for (const auto& s : summary) {
        out << s.factor << ',' << s.level << ',' << to_string(s.method) << ',' << s.runs << ','
            << format_real(s.mean) << '\n';
    }
}

} // namespace dibmix
