#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "kpifc/json.hpp"

namespace kpifc {

// Missing entries (padding, disconnections, failed coercions) are carried as
// quiet NaN. JSON itself cannot encode NaN and coercion never emits a
// non-finite value, so the marker is unambiguous.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double x) { return std::isnan(x); }

// E_k(D): all values directly associated with key `k`, depth-first in
// encounter order. Subtrees matched at `k` are descended into as well, so
// nested occurrences are collected after their enclosing match.
using ValueList = std::vector<const JsonNode*>;

ValueList extract_key(const JsonNode& tree, std::string_view key);

// Rows of possibly differing length, in first-layer subtree order.
// coercion_failures counts values that could not be turned into a number
// (those entries are Missing in place).
struct RaggedSeries {
    std::vector<std::vector<double>> rows;
    std::size_t coercion_failures = 0;
};

// Number passes through; booleans map to 1/0; strings are parsed as decimal
// floats when the whole (trimmed) string parses to a finite value; anything
// else becomes Missing and is tallied.
double coerce_numeric(const JsonNode& node, std::size_t* failures);

RaggedSeries extract_two_layer(const JsonNode& tree, std::string_view k1, std::string_view k2);

// m x L table with right-padded rows: row i holds its original entries
// followed by L - len_i Missing cells.
struct KpiTable {
    std::vector<std::vector<double>> data; // every row has length L
    std::vector<std::string> column_names; // empty = unnamed
    std::size_t rows() const { return data.size(); }
    std::size_t cols() const { return data.empty() ? 0 : data.front().size(); }

    bool operator==(const KpiTable& other) const;
};

KpiTable pad_stack(const RaggedSeries& series);

// One record per row; Missing serializes as the empty field; header emitted
// when column_names is non-empty. Finite values round-trip bit-exactly.
void export_csv(const KpiTable& table, const std::string& path);
std::string to_csv(const KpiTable& table);

KpiTable import_csv(const std::string& path);
KpiTable parse_csv(std::string_view text);

} // namespace kpifc
