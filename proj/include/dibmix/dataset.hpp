#pragma once

#include "dibmix/error.hpp"
#include "dibmix/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace dibmix {

enum class VariableKind { continuous, categorical };

struct VariableSchema {
    std::string              name;
    VariableKind             kind = VariableKind::continuous;
    std::vector<std::string> levels; // categorical only, index = level code

    [[nodiscard]] bool is_categorical() const noexcept { return kind == VariableKind::categorical; }
    [[nodiscard]] int level_count() const noexcept { return static_cast<int>(levels.size()); }
};

/// n observations over continuous and categorical variables, with
/// observation weights p(x). Immutable after construction.
///
/// The schema lists variables in their original (file) order; the
/// continuous and categorical matrices hold the columns of each kind in
/// that same relative order.
class MixedDataset {
  public:
    MixedDataset() = default;

    MixedDataset(std::vector<VariableSchema> schema, Matrix<double> continuous, Matrix<int> categorical,
                 std::vector<double> weights = {})
        : schema_(std::move(schema)), continuous_(std::move(continuous)), categorical_(std::move(categorical)),
          weights_(std::move(weights)) {
        for (std::size_t v = 0; v < schema_.size(); ++v) {
            (schema_[v].is_categorical() ? categorical_vars_ : continuous_vars_).push_back(v);
        }
        validate();
    }

    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] std::size_t continuous_count() const noexcept { return continuous_vars_.size(); }
    [[nodiscard]] std::size_t categorical_count() const noexcept { return categorical_vars_.size(); }

    [[nodiscard]] const std::vector<VariableSchema>& schema() const noexcept { return schema_; }
    [[nodiscard]] const Matrix<double>& continuous() const noexcept { return continuous_; }
    [[nodiscard]] const Matrix<int>& categorical() const noexcept { return categorical_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

    [[nodiscard]] const VariableSchema& continuous_variable(std::size_t c) const { return schema_[continuous_vars_[c]]; }
    [[nodiscard]] const VariableSchema& categorical_variable(std::size_t d) const {
        return schema_[categorical_vars_[d]];
    }
    [[nodiscard]] int levels(std::size_t d) const { return categorical_variable(d).level_count(); }

    [[nodiscard]] MixedDataset with_continuous(Matrix<double> continuous) const {
        return {schema_, std::move(continuous), categorical_, weights_};
    }
    [[nodiscard]] MixedDataset with_weights(std::vector<double> weights) const {
        return {schema_, continuous_, categorical_, std::move(weights)};
    }

    /// Rows at the given indices; weights are renormalized.
    [[nodiscard]] MixedDataset subset(const std::vector<std::size_t>& rows) const {
        Matrix<double>      cont(rows.size(), continuous_count());
        Matrix<int>         cat(rows.size(), categorical_count());
        std::vector<double> w(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            require(rows[r] < size(), "invalid_argument", "subset row index out of range");
            std::ranges::copy(continuous_.row(rows[r]), cont.row(r).begin());
            std::ranges::copy(categorical_.row(rows[r]), cat.row(r).begin());
            w[r] = weights_[rows[r]];
        }
        return {schema_, std::move(cont), std::move(cat), std::move(w)};
    }

  private:
    void validate() {
        const std::size_t n = std::max(continuous_.rows(), categorical_.rows());
        require(n >= 1, "empty_dataset", "dataset has no observations");
        require(!schema_.empty(), "schema_error", "dataset has no variables");
        require(continuous_.cols() == continuous_count() && categorical_.cols() == categorical_count(),
                "schema_error", "matrix widths do not match the schema");
        require(continuous_count() == 0 || continuous_.rows() == n, "schema_error", "continuous block row mismatch");
        require(categorical_count() == 0 || categorical_.rows() == n, "schema_error",
                "categorical block row mismatch");
        if (continuous_.rows() != n) {
            continuous_ = Matrix<double>(n, 0);
        }
        if (categorical_.rows() != n) {
            categorical_ = Matrix<int>(n, 0);
        }

        for (const auto& var : schema_) {
            if (var.is_categorical()) {
                require(var.level_count() >= 2, "schema_error",
                        "categorical variable '" + var.name + "' needs at least 2 levels");
                std::unordered_set<std::string> seen(var.levels.begin(), var.levels.end());
                require(seen.size() == var.levels.size(), "schema_error",
                        "categorical variable '" + var.name + "' has duplicate levels");
            } else {
                require(var.levels.empty(), "schema_error",
                        "continuous variable '" + var.name + "' must not carry levels");
            }
        }
        for (std::size_t d = 0; d < categorical_count(); ++d) {
            const int l = levels(d);
            for (std::size_t i = 0; i < n; ++i) {
                require(categorical_(i, d) >= 0 && categorical_(i, d) < l, "schema_error",
                        "categorical code out of range for '" + categorical_variable(d).name + "'");
            }
        }
        for (double v : continuous_.data()) {
            require(std::isfinite(v), "parse_error", "continuous values must be finite");
        }

        if (weights_.empty()) {
            weights_.assign(n, 1.0 / static_cast<double>(n));
            return;
        }
        require(weights_.size() == n, "invalid_argument", "weights length does not match observations");
        double total = 0.0;
        for (double w : weights_) {
            require(std::isfinite(w) && w > 0.0, "invalid_argument", "weights must be strictly positive");
            total += w;
        }
        // Equal weights map to exactly 1/n so re-normalizing is idempotent.
        if (std::ranges::all_of(weights_, [&](double w) { return w == weights_.front(); })) {
            weights_.assign(n, 1.0 / static_cast<double>(n));
        } else if (total != 1.0) {
            for (double& w : weights_) {
                w /= total;
            }
        }
    }

    std::vector<VariableSchema> schema_;
    Matrix<double>              continuous_;
    Matrix<int>                 categorical_;
    std::vector<double>         weights_;
    std::vector<std::size_t>    continuous_vars_;
    std::vector<std::size_t>    categorical_vars_;
};

// ---------------------------------------------------------------------------
// CSV ingestion

struct CsvTable {
    std::vector<std::string>              header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::optional<std::size_t> column_index(std::string_view name) const {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) {
                return c;
            }
        }
        return std::nullopt;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record; double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string              cur;
    bool                     quoted = false;
    bool                     was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(was_quoted ? cur : trim(cur));
    return fields;
}

inline std::optional<double> parse_double(std::string_view s) {
    double value = 0.0;
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (s.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

inline std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos && trim(s) == s) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out.push_back('"');
        }
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

// Sorted distinct values; numeric order when every value parses as a number.
inline std::vector<std::string> sorted_levels(const std::vector<std::string>& values) {
    std::vector<std::string> levels(values);
    std::ranges::sort(levels);
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const bool numeric = std::ranges::all_of(levels, [](const auto& v) { return parse_double(v).has_value(); });
    if (numeric) {
        std::ranges::stable_sort(levels, {}, [](const auto& v) { return *parse_double(v); });
    }
    return levels;
}

} // namespace detail

inline CsvTable read_csv_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good() && std::filesystem::is_regular_file(path), "input_not_found",
            "cannot open input file '" + path.string() + "'");
    CsvTable    table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) {
            continue;
        }
        auto fields = detail::split_csv_line(line);
        if (table.header.empty()) {
            if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
                fields.front().erase(0, 3);
            }
            table.header = std::move(fields);
            continue;
        }
        require(fields.size() == table.header.size(), "parse_error",
                "row " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                    " fields, found " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    require(!table.header.empty(), "parse_error", "input file '" + path.string() + "' has no header row");
    return table;
}

/// Column designations for turning a CSV table into a dataset. Columns not
/// named are continuous; ignored columns (ids, class labels) are dropped.
struct SchemaSpec {
    std::vector<std::string> categorical;
    std::vector<std::string> ignore;
};

/// Schema file: one `name,kind` pair per line, kind in
/// {continuous, categorical, ignore}. Blank lines and `#` comments skipped.
inline SchemaSpec read_schema_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "input_not_found", "cannot open schema file '" + path.string() + "'");
    SchemaSpec  spec;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto fields = detail::split_csv_line(text);
        require(fields.size() == 2, "schema_error",
                "schema line " + std::to_string(line_no) + ": expected 'name,kind'");
        if (fields[1] == "categorical") {
            spec.categorical.push_back(fields[0]);
        } else if (fields[1] == "ignore") {
            spec.ignore.push_back(fields[0]);
        } else {
            require(fields[1] == "continuous", "schema_error",
                    "schema line " + std::to_string(line_no) + ": unknown kind '" + fields[1] + "'");
        }
    }
    return spec;
}

inline MixedDataset dataset_from_table(const CsvTable& table, const SchemaSpec& spec) {
    for (const auto& names : {spec.categorical, spec.ignore}) {
        for (const auto& name : names) {
            require(table.column_index(name).has_value(), "unknown_column",
                    "column '" + name + "' not found in header");
        }
    }
    require(!table.rows.empty(), "empty_dataset", "input has a header but no data rows");

    auto contains = [](const std::vector<std::string>& v, const std::string& s) {
        return std::ranges::find(v, s) != v.end();
    };

    std::vector<VariableSchema> schema;
    std::vector<std::size_t>    cont_cols;
    std::vector<std::size_t>    cat_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const auto& name = table.header[c];
        if (contains(spec.ignore, name)) {
            continue;
        }
        VariableSchema var{name, contains(spec.categorical, name) ? VariableKind::categorical : VariableKind::continuous,
                           {}};
        (var.is_categorical() ? cat_cols : cont_cols).push_back(c);
        schema.push_back(std::move(var));
    }
    require(!schema.empty(), "schema_error", "no variables left after ignoring columns");

    const std::size_t n = table.rows.size();
    Matrix<double>    cont(n, cont_cols.size());
    for (std::size_t j = 0; j < cont_cols.size(); ++j) {
        const auto col = cont_cols[j];
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cell = table.rows[i][col];
            const auto  value = detail::parse_double(cell);
            require(value.has_value(), "parse_error",
                    "row " + std::to_string(i + 2) + ", column '" + table.header[col] + "': " +
                        (cell.empty() ? std::string("empty value") : "non-numeric value '" + cell + "'"));
            cont(i, j) = *value;
        }
    }

    Matrix<int> cat(n, cat_cols.size());
    std::size_t d = 0;
    for (auto& var : schema) {
        if (!var.is_categorical()) {
            continue;
        }
        const auto               col = cat_cols[d];
        std::vector<std::string> values(n);
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = table.rows[i][col];
            require(!values[i].empty(), "parse_error",
                    "row " + std::to_string(i + 2) + ", column '" + table.header[col] + "': empty value");
        }
        var.levels = detail::sorted_levels(values);
        require(var.levels.size() >= 2, "schema_error",
                "categorical column '" + var.name + "' has fewer than 2 distinct levels");
        std::unordered_map<std::string, int> code;
        for (std::size_t l = 0; l < var.levels.size(); ++l) {
            code.emplace(var.levels[l], static_cast<int>(l));
        }
        for (std::size_t i = 0; i < n; ++i) {
            cat(i, d) = code.at(values[i]);
        }
        ++d;
    }
    return {std::move(schema), std::move(cont), std::move(cat)};
}

inline MixedDataset read_csv(const std::filesystem::path& path, const SchemaSpec& spec) {
    return dataset_from_table(read_csv_table(path), spec);
}

/// Canonical CSV form: header in schema order, shortest round-trip
/// decimal for reals, level strings for categorical codes.
inline void write_csv(const MixedDataset& ds, std::ostream& out) {
    const auto& schema = ds.schema();
    for (std::size_t v = 0; v < schema.size(); ++v) {
        out << (v ? "," : "") << detail::quote_csv(schema[v].name);
    }
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::size_t c = 0;
        std::size_t d = 0;
        for (std::size_t v = 0; v < schema.size(); ++v) {
            out << (v ? "," : "");
            if (schema[v].is_categorical()) {
                out << detail::quote_csv(schema[v].levels[static_cast<std::size_t>(ds.categorical()(i, d++))]);
            } else {
                out << detail::format_double(ds.continuous()(i, c++));
            }
        }
        out << '\n';
    }
}

inline void write_csv(const MixedDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "output_error", "cannot write '" + path.string() + "'");
    write_csv(ds, out);
}

inline void write_schema_file(const MixedDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "output_error", "cannot write '" + path.string() + "'");
    for (const auto& var : ds.schema()) {
        out << detail::quote_csv(var.name) << ',' << (var.is_categorical() ? "categorical" : "continuous") << '\n';
    }
}

inline SchemaSpec schema_spec_of(const MixedDataset& ds) {
    SchemaSpec spec;
    for (const auto& var : ds.schema()) {
        if (var.is_categorical()) {
            spec.categorical.push_back(var.name);
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Standardization

struct ColumnMoments {
    double mean = 0.0;
    double variance = 0.0; // sample variance, n - 1 denominator
};

inline ColumnMoments column_moments(const Matrix<double>& m, std::size_t col) {
    const std::size_t n = m.rows();
    ColumnMoments     out;
    for (std::size_t i = 0; i < n; ++i) {
        out.mean += m(i, col);
    }
    out.mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = m(i, col) - out.mean;
        out.variance += dev * dev;
    }
    out.variance = n > 1 ? out.variance / static_cast<double>(n - 1) : 0.0;
    return out;
}

/// Centres every continuous column and scales it to unit sample variance.
inline MixedDataset standardize(const MixedDataset& ds) {
    if (ds.continuous_count() == 0) {
        return ds;
    }
    require(ds.size() >= 2, "invalid_argument", "standardize needs at least 2 observations");
    Matrix<double> out = ds.continuous();
    for (std::size_t c = 0; c < ds.continuous_count(); ++c) {
        const auto   mom = column_moments(out, c);
        const double sd = std::sqrt(mom.variance);
        require(sd > 0.0 && std::isfinite(sd), "zero_variance",
                "continuous column '" + ds.continuous_variable(c).name + "' has zero variance");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            out(i, c) = (out(i, c) - mom.mean) / sd;
        }
    }
    return ds.with_continuous(std::move(out));
}

} // namespace dibmix
