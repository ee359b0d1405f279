#pragma once

#include "dibmix/error.hpp"
#include "dibmix/matrix.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace dibmix {

/// Cluster labels per observation; any integer codes.
using Partition = std::vector<int>;

/// Dense codes 0..m-1 for arbitrary labels, in sorted label order.
template <typename Label>
std::vector<int> encode_labels(std::span<const Label> labels, std::size_t* distinct = nullptr) {
    std::map<Label, int> code;
    for (const auto& l : labels) {
        code.emplace(l, 0);
    }
    int next = 0;
    for (auto& [_, c] : code) {
        c = next++;
    }
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[i] = code.at(labels[i]);
    }
    if (distinct != nullptr) {
        *distinct = code.size();
    }
    return out;
}

/// n_ij = number of observations with label i in a and j in b; rows and
/// columns follow the sorted distinct labels of a and b.
inline Matrix<std::int64_t> contingency(std::span<const int> a, std::span<const int> b) {
    require(a.size() == b.size(), "length_mismatch", "partitions have different lengths");
    require(!a.empty(), "invalid_argument", "partitions are empty");
    std::size_t ra = 0;
    std::size_t rb = 0;
    const auto  ca = encode_labels(a, &ra);
    const auto  cb = encode_labels(b, &rb);
    Matrix<std::int64_t> table(ra, rb, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++table(static_cast<std::size_t>(ca[i]), static_cast<std::size_t>(cb[i]));
    }
    return table;
}

/// Adjusted Rand Index (Hubert & Arabie). Identical partitions whose
/// expected and maximal index coincide (both single-cluster, both all
/// singletons, n = 1) score 1.
inline double ari(std::span<const int> a, std::span<const int> b) {
    const auto table = contingency(a, b);
    auto       choose2 = [](std::int64_t m) { return static_cast<double>(m) * static_cast<double>(m - 1) / 2.0; };

    double sum_cells = 0.0;
    std::vector<std::int64_t> row(table.rows(), 0);
    std::vector<std::int64_t> col(table.cols(), 0);
    for (std::size_t i = 0; i < table.rows(); ++i) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            sum_cells += choose2(table(i, j));
            row[i] += table(i, j);
            col[j] += table(i, j);
        }
    }
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (auto r : row) {
        sum_a += choose2(r);
    }
    for (auto c : col) {
        sum_b += choose2(c);
    }
    const double total = choose2(static_cast<std::int64_t>(a.size()));
    if (total == 0.0) {
        return 1.0;
    }
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0) {
        return 1.0;
    }
    return (sum_cells - expected) / denom;
}

} // namespace dibmix
