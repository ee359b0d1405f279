#include "dibmix/bandwidth.hpp"
#include "dibmix/baselines.hpp"
#include "dibmix/benchmark.hpp"
#include "dibmix/datagen.hpp"
#include "dibmix/dataset.hpp"
#include "dibmix/dib.hpp"
#include "dibmix/error.hpp"
#include "dibmix/metrics.hpp"
#include "dibmix/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct InputArgs {
    std::string              path;
    std::vector<std::string> categorical;
    std::string              schema_file;
    std::vector<std::string> ignore;
    std::string              label_column;
    std::size_t              subsample = 0;
    bool                     no_standardize = false;
};

struct LoadedInput {
    dibmix::MixedDataset                    data;
    std::optional<std::vector<std::string>> labels;
    std::vector<std::size_t>                rows; // original row indices
};

void add_input_flags(CLI::App& cmd, InputArgs& args) {
    cmd.add_option("--input", args.path, "Input CSV (header row, comma separated)")->required();
    cmd.add_option("--categorical", args.categorical, "Categorical column (repeatable)");
    cmd.add_option("--schema", args.schema_file, "Schema file with one 'name,kind' pair per line");
    cmd.add_option("--ignore", args.ignore, "Column to drop (repeatable)");
    cmd.add_option("--label-column", args.label_column, "Class label column: dropped from the data, used for ARI");
    cmd.add_option("--subsample", args.subsample, "Cluster a seeded random subsample of this many rows");
    cmd.add_flag("--no-standardize", args.no_standardize, "Use continuous variables on their raw scale");
}

LoadedInput load_input(const InputArgs& args, std::uint64_t seed) {
    const auto table = dibmix::read_csv_table(args.path);
    auto       spec = args.schema_file.empty() ? dibmix::SchemaSpec{} : dibmix::read_schema_file(args.schema_file);
    spec.categorical.insert(spec.categorical.end(), args.categorical.begin(), args.categorical.end());
    spec.ignore.insert(spec.ignore.end(), args.ignore.begin(), args.ignore.end());

    LoadedInput out;
    std::optional<std::size_t> label_col;
    if (!args.label_column.empty()) {
        label_col = table.column_index(args.label_column);
        dibmix::require(label_col.has_value(), "unknown_column",
                        "label column '" + args.label_column + "' not found in header");
        spec.ignore.push_back(args.label_column);
    }
    out.data = dibmix::dataset_from_table(table, spec);
    out.rows.resize(out.data.size());
    std::iota(out.rows.begin(), out.rows.end(), std::size_t{0});

    if (args.subsample > 0 && args.subsample < out.data.size()) {
        std::mt19937_64 rng(dibmix::derive_seed(seed, 0x5AB5A3F1ULL));
        std::shuffle(out.rows.begin(), out.rows.end(), rng);
        out.rows.resize(args.subsample);
        std::ranges::sort(out.rows);
        out.data = out.data.subset(out.rows);
    }
    if (label_col) {
        std::vector<std::string> labels;
        for (auto r : out.rows) {
            labels.push_back(table.rows[r][*label_col]);
        }
        out.labels = std::move(labels);
    }
    return out;
}

std::optional<double> ari_against(const std::optional<std::vector<std::string>>& labels,
                                  const dibmix::Partition& pred) {
    if (!labels) {
        return std::nullopt;
    }
    const auto truth = dibmix::encode_labels(std::span<const std::string>(*labels));
    return dibmix::ari(truth, pred);
}

fs::path ensure_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    dibmix::require(fs::is_directory(p), "output_error", "cannot create output directory '" + dir + "'");
    return p;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    dibmix::require(out.good(), "output_error", "cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

void write_assignment(const fs::path& path, const dibmix::Partition& labels) {
    std::ofstream out(path);
    dibmix::require(out.good(), "output_error", "cannot write '" + path.string() + "'");
    out << "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out << i << ',' << labels[i] << '\n';
    }
}

json input_manifest(const InputArgs& args) {
    return {{"input", args.path},         {"categorical", args.categorical}, {"schema", args.schema_file},
            {"ignore", args.ignore},      {"label_column", args.label_column},
            {"subsample", args.subsample}, {"standardize", !args.no_standardize}};
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& field : dibmix::detail::split_csv_line(text)) {
        const auto v = dibmix::detail::parse_double(field);
        dibmix::require(v.has_value(), "usage_error", "cannot parse number '" + field + "' in list '" + text + "'");
        out.push_back(*v);
    }
    return out;
}

template <typename T>
std::vector<T> parse_list_as(const std::string& text) {
    std::vector<T> out;
    for (double v : parse_list(text)) {
        dibmix::require(v >= 0 && std::floor(v) == v, "usage_error", "expected non-negative integers in '" + text + "'");
        out.push_back(static_cast<T>(v));
    }
    return out;
}

// ---------------------------------------------------------------------------

struct DibArgs {
    std::size_t   k = 2;
    double        beta = 100.0;
    int           restarts = 100;
    int           max_iter = 100;
    std::uint64_t seed = 0;
    unsigned      threads = 0;
    std::string   output_dir = ".";
    std::optional<double> s;
    double        s_multiplier = 3.0;
    std::string   lambda;
    std::optional<double> lambda_offset;
    double        categorical_weight = 1.0;
    std::size_t   max_n = 10000;
};

void add_dib_flags(CLI::App& cmd, DibArgs& a, bool with_beta) {
    cmd.add_option("--k", a.k, "Number of clusters")->capture_default_str();
    if (with_beta) {
        cmd.add_option("--beta", a.beta, "Relevance weight beta")->capture_default_str();
    }
    cmd.add_option("--restarts", a.restarts, "Random initializations")->capture_default_str();
    cmd.add_option("--max-iter", a.max_iter, "Iteration cap per restart")->capture_default_str();
    cmd.add_option("--seed", a.seed, "Master seed")->capture_default_str();
    cmd.add_option("--threads", a.threads, "Worker threads (default: DIBMIX_THREADS or 1)");
    cmd.add_option("--output-dir", a.output_dir, "Directory for result files")->capture_default_str();
    cmd.add_option("--s", a.s, "Continuous bandwidth (overrides selection)");
    cmd.add_option("--s-multiplier", a.s_multiplier, "Multiplier of the default s rule")->capture_default_str();
    cmd.add_option("--lambda", a.lambda, "Comma-separated categorical bandwidths (overrides selection)");
    cmd.add_option("--lambda-offset", a.lambda_offset, "Use lambda = (l-1)/l - offset for every variable");
    cmd.add_option("--categorical-weight", a.categorical_weight, "Importance of categorical vs continuous variables")
        ->capture_default_str();
    cmd.add_option("--max-n", a.max_n, "Cap on n for the n x n density matrix")->capture_default_str();
}

dibmix::ClusterConfig cluster_config(const DibArgs& a, const InputArgs& in) {
    dibmix::ClusterConfig cfg;
    cfg.dib = {a.k, a.beta, a.restarts, a.max_iter, a.seed, dibmix::resolve_threads(a.threads)};
    cfg.balance.categorical_weight = a.categorical_weight;
    cfg.balance.s_multiplier = a.s_multiplier;
    cfg.balance.s_value = a.s;
    if (!a.lambda.empty()) {
        cfg.balance.lambda_value = parse_list(a.lambda);
    }
    cfg.balance.lambda_offset = a.lambda_offset;
    cfg.standardize = !in.no_standardize;
    cfg.density.max_n = a.max_n;
    cfg.density.threads = cfg.dib.threads;
    return cfg;
}

json dib_manifest(const DibArgs& a) {
    json j{{"k", a.k},
           {"beta", a.beta},
           {"restarts", a.restarts},
           {"max_iter", a.max_iter},
           {"seed", a.seed},
           {"threads", dibmix::resolve_threads(a.threads)},
           {"s_multiplier", a.s_multiplier},
           {"lambda", a.lambda},
           {"categorical_weight", a.categorical_weight},
           {"max_n", a.max_n}};
    j["s"] = a.s ? json(*a.s) : json(nullptr);
    j["lambda_offset"] = a.lambda_offset ? json(*a.lambda_offset) : json(nullptr);
    return j;
}

void write_density_csv(const fs::path& path, const dibmix::ConditionalDensity& density) {
    std::ofstream out(path);
    dibmix::require(out.good(), "output_error", "cannot write '" + path.string() + "'");
    for (std::size_t i = 0; i < density.size(); ++i) {
        const auto row = density.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            out << (j ? "," : "") << dibmix::detail::format_double(row[j]);
        }
        out << '\n';
    }
}

int cmd_cluster(const InputArgs& in, const DibArgs& a, const std::string& density_path, const std::string& trace_path) {
    const auto loaded = load_input(in, a.seed);
    const auto cfg = cluster_config(a, in);
    const auto run = dibmix::run_cluster(loaded.data, cfg);
    const auto dir = ensure_dir(a.output_dir);

    json result = dibmix::to_json(run.result);
    result["status"] = "ok";
    result["n"] = run.data.size();
    result["k"] = a.k;
    result["beta"] = a.beta;
    result["bandwidths"] = dibmix::to_json(run.bandwidths);
    if (run.selection) {
        result["lambda_selection"] = dibmix::to_json(*run.selection);
    }
    if (const auto score = ari_against(loaded.labels, run.result.encoder.assign)) {
        result["ari"] = *score;
    }
    if (in.subsample > 0) {
        result["rows"] = loaded.rows;
    }
    write_json(dir / "result.json", result);
    write_assignment(dir / "assignment.csv", run.result.encoder.assign);
    write_json(dir / "manifest.json", {{"command", "cluster"},
                                       {"version", dibmix::version},
                                       {"input", input_manifest(in)},
                                       {"parameters", dib_manifest(a)}});
    if (!density_path.empty()) {
        write_density_csv(density_path, run.density);
    }
    if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        out << "iteration,objective\n";
        for (std::size_t i = 0; i < run.result.objective_trace.size(); ++i) {
            out << i + 1 << ',' << dibmix::detail::format_double(run.result.objective_trace[i]) << '\n';
        }
    }

    std::cout << "H(T)        " << run.result.compression << '\n'
              << "I(T,Y)      " << run.result.relevance << '\n'
              << "objective   " << run.result.objective << '\n'
              << "effective_k " << run.result.effective_k << '\n';
    if (result.contains("ari")) {
        std::cout << "ARI         " << result["ari"].get<double>() << '\n';
    }
    return 0;
}

int cmd_sweep(const InputArgs& in, DibArgs a, const std::string& betas_text) {
    const auto loaded = load_input(in, a.seed);
    auto       cfg = cluster_config(a, in);
    const auto data = dibmix::prepare(loaded.data, cfg.standardize);
    const auto bw = dibmix::select_bandwidths(data, cfg.balance).bandwidths;
    const auto density = dibmix::estimate_conditional(data, bw, cfg.density);
    const auto betas = parse_list(betas_text);
    const auto rows = dibmix::beta_sweep(density, data.weights(), betas, cfg.dib);
    const auto suggestion = dibmix::max_curvature_beta(rows);

    const auto    dir = ensure_dir(a.output_dir);
    std::ofstream out(dir / "sweep.csv");
    out << "beta,H,I,objective,effective_k\n";
    for (const auto& r : rows) {
        out << dibmix::detail::format_double(r.beta) << ',' << dibmix::detail::format_double(r.compression) << ','
            << dibmix::detail::format_double(r.relevance) << ',' << dibmix::detail::format_double(r.objective) << ','
            << r.effective_k << '\n';
    }
    auto params = dib_manifest(a);
    params["betas"] = betas;
    write_json(dir / "manifest.json", {{"command", "sweep-beta"},
                                       {"version", dibmix::version},
                                       {"input", input_manifest(in)},
                                       {"parameters", params},
                                       {"bandwidths", dibmix::to_json(bw)}});
    for (const auto& r : rows) {
        std::cout << "beta=" << r.beta << " H=" << r.compression << " I=" << r.relevance
                  << " effective_k=" << r.effective_k << '\n';
    }
    if (suggestion) {
        std::cout << "max-curvature beta " << *suggestion << '\n';
    }
    return 0;
}

struct BaselineArgs {
    std::string           method;
    std::size_t           k = 2;
    std::optional<double> gamma;
    std::optional<int>    restarts;
    int                   max_iter = 100;
    std::uint64_t         seed = 0;
    unsigned              threads = 0;
    std::string           output_dir = ".";
};

int cmd_baseline(const InputArgs& in, const BaselineArgs& a) {
    const auto loaded = load_input(in, a.seed);
    const auto threads = dibmix::resolve_threads(a.threads);
    json       result{{"status", "ok"}, {"method", a.method}, {"k", a.k}};
    dibmix::Partition labels;

    const auto method = dibmix::parse_method(a.method);
    dibmix::require(method != dibmix::Method::dibmix, "usage_error", "baseline --method must be 'kproto' or 'pam'");
    if (method == dibmix::Method::kproto) {
        const auto data = dibmix::prepare(loaded.data, !in.no_standardize);
        dibmix::KPrototypesOptions opts;
        opts.k = a.k;
        opts.gamma = a.gamma;
        opts.restarts = a.restarts.value_or(100);
        opts.max_iter = a.max_iter;
        opts.seed = a.seed;
        opts.threads = threads;
        const auto fit = dibmix::kprototypes_fit(data, opts);
        labels = fit.labels;
        result["objective"] = fit.objective;
        result["gamma"] = fit.gamma;
        result["iterations"] = fit.iterations;
        result["converged"] = fit.converged;
        result["restart_index"] = fit.restart_index;
        result["seed"] = fit.seed;
        result["objective_trace"] = fit.objective_trace;
    } else {
        dibmix::PamOptions opts;
        opts.k = a.k;
        opts.restarts = a.restarts.value_or(1);
        opts.max_iter = a.max_iter;
        opts.seed = a.seed;
        opts.threads = threads;
        const auto fit = dibmix::pam_fit(dibmix::gower(loaded.data), opts);
        labels = fit.labels;
        result["objective"] = fit.cost;
        result["medoids"] = fit.medoids;
        result["iterations"] = fit.iterations;
        result["restart_index"] = fit.restart_index;
        result["seed"] = fit.seed;
        result["objective_trace"] = fit.cost_trace;
    }
    result["assignment"] = labels;
    result["effective_k"] = dibmix::distinct_labels(labels);
    result["n"] = labels.size();
    if (const auto score = ari_against(loaded.labels, labels)) {
        result["ari"] = *score;
    }

    const auto dir = ensure_dir(a.output_dir);
    write_json(dir / "result.json", result);
    write_assignment(dir / "assignment.csv", labels);
    json params{{"method", a.method}, {"k", a.k},      {"max_iter", a.max_iter},
                {"seed", a.seed},     {"threads", threads}};
    params["gamma"] = a.gamma ? json(*a.gamma) : json(nullptr);
    params["restarts"] = a.restarts ? json(*a.restarts) : json(nullptr);
    write_json(dir / "manifest.json",
               {{"command", "baseline"}, {"version", dibmix::version}, {"input", input_manifest(in)}, {"parameters", params}});

    std::cout << "objective   " << result["objective"].get<double>() << '\n'
              << "effective_k " << result["effective_k"].get<int>() << '\n';
    if (result.contains("ari")) {
        std::cout << "ARI         " << result["ari"].get<double>() << '\n';
    }
    return 0;
}

struct DatagenArgs {
    dibmix::GenSpec       spec;
    std::string           levels = "4";
    std::optional<double> overlap;
    std::string           balance = "equal";
    std::string           output_dir = ".";
    std::string           prefix = "data";
};

int cmd_datagen(DatagenArgs a) {
    a.spec.levels = parse_list_as<int>(a.levels);
    if (a.overlap) {
        a.spec.overlap_continuous = a.spec.overlap_categorical = *a.overlap;
    }
    a.spec.balance = dibmix::parse_balance(a.balance);
    const auto gen = dibmix::generate(a.spec);

    const auto dir = ensure_dir(a.output_dir);
    dibmix::write_csv(gen.data, dir / (a.prefix + ".csv"));
    dibmix::write_schema_file(gen.data, dir / (a.prefix + "_schema.csv"));
    write_assignment(dir / (a.prefix + "_truth.csv"), gen.truth);

    json masses = json::array();
    for (const auto& m : gen.masses) {
        masses.push_back({{"cluster_1", m.first}, {"cluster_2", m.second}});
    }
    write_json(dir / (a.prefix + ".json"), {{"command", "datagen"},
                                            {"version", dibmix::version},
                                            {"spec", dibmix::to_json(a.spec)},
                                            {"separation", gen.separation},
                                            {"categorical_masses", masses}});
    std::cout << "wrote " << gen.data.size() << " rows to " << (dir / (a.prefix + ".csv")).string() << '\n'
              << "separation " << gen.separation << '\n';
    return 0;
}

struct BenchmarkArgs {
    std::string sizes = "200,500,1000";
    std::string pc = "2,6";
    std::string pd = "2,6";
    std::string levels = "2,4,6";
    std::string overlap;
    std::string overlap_cont = "0.3,0.6";
    std::string overlap_cat = "0.3,0.6";
    std::string balance = "equal,imbalanced";
    std::string methods = "dibmix,kproto,pam";
    std::string output_dir = ".";
    std::string aggregate;
    unsigned    threads = 0;
};

int cmd_benchmark(BenchmarkArgs a, dibmix::BenchmarkPlan plan) {
    const auto dir = ensure_dir(a.output_dir);
    std::vector<dibmix::BenchmarkRow> rows;
    if (!a.aggregate.empty()) {
        rows = dibmix::read_results_csv(a.aggregate);
    } else {
        plan.sizes = parse_list_as<std::size_t>(a.sizes);
        plan.continuous = parse_list_as<std::size_t>(a.pc);
        plan.categorical = parse_list_as<std::size_t>(a.pd);
        plan.levels = parse_list_as<int>(a.levels);
        if (!a.overlap.empty()) {
            a.overlap_cont = a.overlap_cat = a.overlap;
        }
        plan.overlap_continuous = parse_list(a.overlap_cont);
        plan.overlap_categorical = parse_list(a.overlap_cat);
        plan.balances.clear();
        for (const auto& b : dibmix::detail::split_csv_line(a.balance)) {
            plan.balances.push_back(dibmix::parse_balance(b));
        }
        plan.methods.clear();
        for (const auto& m : dibmix::detail::split_csv_line(a.methods)) {
            plan.methods.push_back(dibmix::parse_method(m));
        }
        plan.threads = dibmix::resolve_threads(a.threads);
        rows = dibmix::run_benchmark(plan);

        std::ofstream results(dir / "results.csv");
        dibmix::write_results_csv(rows, results);
        std::ofstream timings(dir / "timings.csv");
        dibmix::write_timings_csv(rows, timings);

        json methods = json::array();
        for (auto m : plan.methods) {
            methods.push_back(dibmix::to_string(m));
        }
        json balances = json::array();
        for (auto b : plan.balances) {
            balances.push_back(dibmix::to_string(b));
        }
        write_json(dir / "manifest.json",
                   {{"command", "benchmark"},
                    {"version", dibmix::version},
                    {"grid",
                     {{"n", plan.sizes},
                      {"p_c", plan.continuous},
                      {"p_d", plan.categorical},
                      {"levels", plan.levels},
                      {"overlap_cont", plan.overlap_continuous},
                      {"overlap_cat", plan.overlap_categorical},
                      {"balance", balances}}},
                    {"cells", dibmix::benchmark_cells(plan).size()},
                    {"replicates", plan.replicates},
                    {"methods", methods},
                    {"seed", plan.seed},
                    {"threads", plan.threads},
                    {"dibmix",
                     {{"beta", plan.beta},
                      {"restarts", plan.restarts},
                      {"max_iter", plan.max_iter},
                      {"categorical_weight", plan.categorical_weight},
                      {"s_multiplier", plan.s_multiplier}}},
                    {"kproto_restarts", plan.kproto_restarts},
                    {"pam_restarts", plan.pam_restarts}});
    }

    const auto by_method = dibmix::summarize_methods(rows);
    std::ofstream summary(dir / "summary_methods.csv");
    dibmix::write_method_summary_csv(by_method, summary);
    std::ofstream factors(dir / "summary_factors.csv");
    dibmix::write_factor_summary_csv(dibmix::summarize_factors(rows), factors);

    dibmix::write_method_summary_csv(by_method, std::cout);
    return 0;
}

int cmd_score(const std::string& truth_path, const std::string& pred_path, const std::string& truth_col,
              const std::string& pred_col) {
    auto read_labels = [](const std::string& path, const std::string& column) {
        const auto  table = dibmix::read_csv_table(path);
        std::size_t col = table.header.size() - 1;
        if (!column.empty()) {
            const auto idx = table.column_index(column);
            dibmix::require(idx.has_value(), "unknown_column", "column '" + column + "' not found in " + path);
            col = *idx;
        } else if (const auto idx = table.column_index("label")) {
            col = *idx;
        }
        std::vector<std::string> labels;
        for (const auto& row : table.rows) {
            labels.push_back(row[col]);
        }
        return labels;
    };
    const auto truth = read_labels(truth_path, truth_col);
    const auto pred = read_labels(pred_path, pred_col);
    const auto a = dibmix::encode_labels(std::span<const std::string>(truth));
    const auto b = dibmix::encode_labels(std::span<const std::string>(pred));
    std::cout << json{{"status", "ok"}, {"ari", dibmix::ari(a, b)}, {"n", truth.size()}}.dump() << '\n';
    return 0;
}

int fail(const std::string& code, const std::string& message, int exit_code) {
    std::cout << dibmix::error_json(code, message).dump() << '\n';
    std::cerr << "error: " << message << '\n';
    return exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic information bottleneck clustering for mixed-type data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dibmix::version);

    InputArgs   in;
    DibArgs     dib;
    std::string density_path;
    std::string trace_path;
    auto*       cluster = app.add_subcommand("cluster", "Cluster a CSV file with DIBmix");
    add_input_flags(*cluster, in);
    add_dib_flags(*cluster, dib, true);
    cluster->add_option("--export-density", density_path, "Write p(y|x) as a dense CSV");
    cluster->add_option("--export-trace", trace_path, "Write the objective trace as CSV");

    InputArgs   sweep_in;
    DibArgs     sweep_dib;
    std::string betas = "0,1,2,5,10,20,50,100";
    auto*       sweep = app.add_subcommand("sweep-beta", "Relevance-compression curve over a list of beta values");
    add_input_flags(*sweep, sweep_in);
    add_dib_flags(*sweep, sweep_dib, false);
    sweep->add_option("--betas", betas, "Comma-separated beta values")->capture_default_str();

    InputArgs    base_in;
    BaselineArgs base;
    auto*        baseline = app.add_subcommand("baseline", "Run K-Prototypes or PAM with Gower dissimilarity");
    add_input_flags(*baseline, base_in);
    baseline->add_option("--method", base.method, "kproto or pam")->required();
    baseline->add_option("--k", base.k, "Number of clusters")->capture_default_str();
    baseline->add_option("--gamma", base.gamma, "K-Prototypes categorical weight");
    baseline->add_option("--restarts", base.restarts, "Restarts (kproto default 100, pam default 1)");
    baseline->add_option("--max-iter", base.max_iter, "Iteration cap")->capture_default_str();
    baseline->add_option("--seed", base.seed, "Master seed")->capture_default_str();
    baseline->add_option("--threads", base.threads, "Worker threads");
    baseline->add_option("--output-dir", base.output_dir, "Directory for result files")->capture_default_str();

    DatagenArgs gen;
    auto*       datagen = app.add_subcommand("datagen", "Generate a two-cluster mixed-type dataset");
    datagen->add_option("--n", gen.spec.n, "Sample size")->capture_default_str();
    datagen->add_option("--pc", gen.spec.continuous, "Continuous variables")->capture_default_str();
    datagen->add_option("--pd", gen.spec.categorical, "Categorical variables")->capture_default_str();
    datagen->add_option("--levels", gen.levels, "Levels: one value or one per categorical variable")
        ->capture_default_str();
    datagen->add_option("--overlap", gen.overlap, "Overlap for both variable types");
    datagen->add_option("--overlap-cont", gen.spec.overlap_continuous, "Continuous overlap")->capture_default_str();
    datagen->add_option("--overlap-cat", gen.spec.overlap_categorical, "Categorical overlap")->capture_default_str();
    datagen->add_option("--separation", gen.spec.separation, "Mean gap override for continuous variables");
    datagen->add_option("--balance", gen.balance, "equal or imbalanced")->capture_default_str();
    datagen->add_option("--clusters", gen.spec.clusters, "Clusters (values above 2 are experimental)")
        ->capture_default_str();
    datagen->add_option("--seed", gen.spec.seed, "Seed")->capture_default_str();
    datagen->add_option("--output-dir", gen.output_dir, "Output directory")->capture_default_str();
    datagen->add_option("--prefix", gen.prefix, "File name prefix")->capture_default_str();

    BenchmarkArgs         bench;
    dibmix::BenchmarkPlan plan;
    auto*                 benchmark = app.add_subcommand("benchmark", "Factorial simulation benchmark");
    benchmark->add_option("--sizes", bench.sizes, "Sample sizes")->capture_default_str();
    benchmark->add_option("--pc", bench.pc, "Continuous variable counts")->capture_default_str();
    benchmark->add_option("--pd", bench.pd, "Categorical variable counts")->capture_default_str();
    benchmark->add_option("--levels", bench.levels, "Categorical level counts")->capture_default_str();
    benchmark->add_option("--overlap", bench.overlap, "Overlap list for both variable types");
    benchmark->add_option("--overlap-cont", bench.overlap_cont, "Continuous overlap list")->capture_default_str();
    benchmark->add_option("--overlap-cat", bench.overlap_cat, "Categorical overlap list")->capture_default_str();
    benchmark->add_option("--balance", bench.balance, "Cluster-size designs")->capture_default_str();
    benchmark->add_option("--methods", bench.methods, "Methods to run")->capture_default_str();
    benchmark->add_option("--replicates", plan.replicates, "Replicates per cell")->capture_default_str();
    benchmark->add_option("--seed", plan.seed, "Master seed")->capture_default_str();
    benchmark->add_option("--threads", bench.threads, "Worker threads");
    benchmark->add_option("--beta", plan.beta, "DIBmix beta")->capture_default_str();
    benchmark->add_option("--restarts", plan.restarts, "DIBmix restarts")->capture_default_str();
    benchmark->add_option("--max-iter", plan.max_iter, "Iteration cap for all methods")->capture_default_str();
    benchmark->add_option("--categorical-weight", plan.categorical_weight, "DIBmix categorical weight")
        ->capture_default_str();
    benchmark->add_option("--s-multiplier", plan.s_multiplier, "DIBmix s multiplier")->capture_default_str();
    benchmark->add_option("--kproto-restarts", plan.kproto_restarts, "K-Prototypes restarts")->capture_default_str();
    benchmark->add_option("--pam-restarts", plan.pam_restarts, "PAM restarts")->capture_default_str();
    benchmark->add_option("--output-dir", bench.output_dir, "Output directory")->capture_default_str();
    benchmark->add_option("--aggregate", bench.aggregate, "Only aggregate an existing results.csv");

    std::string truth_path;
    std::string pred_path;
    std::string truth_col;
    std::string pred_col;
    auto*       score = app.add_subcommand("score", "Adjusted Rand Index between two label files");
    score->add_option("--truth", truth_path, "Reference labels CSV")->required();
    score->add_option("--pred", pred_path, "Predicted labels CSV")->required();
    score->add_option("--truth-column", truth_col, "Label column in the truth file");
    score->add_option("--pred-column", pred_col, "Label column in the prediction file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage_error", e.what(), 2);
    }

    try {
        if (*cluster) {
            return cmd_cluster(in, dib, density_path, trace_path);
        }
        if (*sweep) {
            return cmd_sweep(sweep_in, sweep_dib, betas);
        }
        if (*baseline) {
            return cmd_baseline(base_in, base);
        }
        if (*datagen) {
            return cmd_datagen(gen);
        }
        if (*benchmark) {
            return cmd_benchmark(bench, plan);
        }
        if (*score) {
            return cmd_score(truth_path, pred_path, truth_col, pred_col);
        }
    } catch (const dibmix::Error& e) {
        return fail(e.code(), e.what(), e.kind() == dibmix::ErrorKind::internal ? 1 : 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 1;
}
