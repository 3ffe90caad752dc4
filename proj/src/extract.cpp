#include "kpifc/extract.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace kpifc {

namespace {

// Pre-order work item: emit the node as a match before expanding it.
struct WorkItem {
    const JsonNode* node;
    bool emit;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool parse_finite_double(std::string_view s, double* out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) return false;
    if (!std::isfinite(value)) return false;
    *out = value;
    return true;
}

} // namespace

ValueList extract_key(const JsonNode& tree, std::string_view key) {
    ValueList out;
    std::vector<WorkItem> stack;
    stack.push_back({&tree, false});
    while (!stack.empty()) {
        const WorkItem item = stack.back();
        stack.pop_back();
        if (item.emit) out.push_back(item.node);
        const JsonNode& node = *item.node;
        if (node.is_object()) {
            const auto& members = node.members();
            for (auto it = members.rbegin(); it != members.rend(); ++it)
                stack.push_back({&it->second, it->first == key});
        } else if (node.is_array()) {
            const auto& items = node.items();
            for (auto it = items.rbegin(); it != items.rend(); ++it)
                stack.push_back({&*it, false});
        }
    }
    return out;
}

double coerce_numeric(const JsonNode& node, std::size_t* failures) {
    if (node.is_number()) return node.as_number();
    if (node.is_bool()) return node.as_bool() ? 1.0 : 0.0;
    if (node.is_string()) {
        double value;
        if (parse_finite_double(node.as_string(), &value)) return value;
    }
    if (failures) ++*failures;
    return kMissing;
}

RaggedSeries extract_two_layer(const JsonNode& tree, std::string_view k1, std::string_view k2) {
    RaggedSeries series;
    const ValueList subtrees = extract_key(tree, k1);
    series.rows.reserve(subtrees.size());
    for (const JsonNode* subtree : subtrees) {
        const ValueList values = extract_key(*subtree, k2);
        std::vector<double> row;
        row.reserve(values.size());
        for (const JsonNode* v : values) row.push_back(coerce_numeric(*v, &series.coercion_failures));
        series.rows.push_back(std::move(row));
    }
    return series;
}

bool KpiTable::operator==(const KpiTable& other) const {
    if (column_names != other.column_names) return false;
    if (data.size() != other.data.size()) return false;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != other.data[i].size()) return false;
        for (std::size_t j = 0; j < data[i].size(); ++j) {
            const double a = data[i][j];
            const double b = other.data[i][j];
            if (is_missing(a) != is_missing(b)) return false;
            if (!is_missing(a) && a != b) return false;
        }
    }
    return true;
}

KpiTable pad_stack(const RaggedSeries& series) {
    if (series.rows.empty()) throw DataError("pad_stack: empty series");
    std::size_t width = 0;
    for (const auto& row : series.rows) width = std::max(width, row.size());
    KpiTable table;
    table.data.reserve(series.rows.size());
    for (const auto& row : series.rows) {
        std::vector<double> padded(width, kMissing);
        std::copy(row.begin(), row.end(), padded.begin());
        table.data.push_back(std::move(padded));
    }
    return table;
}

namespace {

void append_csv_field(std::string& out, const std::string& field) {
    if (field.find_first_of(",\"\n\r") != std::string::npos) {
        out.push_back('"');
        for (char c : field) {
            if (c == '"') out.push_back('"');
            out.push_back(c);
        }
        out.push_back('"');
    } else {
        out += field;
    }
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
            } else {
                current.push_back(c);
                ++i;
            }
        } else if (c == '"') {
            if (!current.empty())
                throw DataError("CSV line " + std::to_string(lineno) + ": stray quote");
            quoted = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
            ++i;
        } else {
            current.push_back(c);
            ++i;
        }
    }
    if (quoted) throw DataError("CSV line " + std::to_string(lineno) + ": unterminated quote");
    fields.push_back(std::move(current));
    return fields;
}

} // namespace

std::string to_csv(const KpiTable& table) {
    std::string out;
    if (!table.column_names.empty()) {
        for (std::size_t j = 0; j < table.column_names.size(); ++j) {
            if (j) out.push_back(',');
            append_csv_field(out, table.column_names[j]);
        }
        out.push_back('\n');
    }
    for (const auto& row : table.data) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out.push_back(',');
            if (!is_missing(row[j])) out += format_double(row[j]);
        }
        out.push_back('\n');
    }
    return out;
}

void export_csv(const KpiTable& table, const std::string& path) {
    write_file(path, to_csv(table));
}

KpiTable parse_csv(std::string_view text) {
    KpiTable table;
    std::size_t lineno = 0;
    std::size_t width = 0;
    bool first_line = true;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = end + 1;
        ++lineno;
        // A final empty line is the row terminator, except in one-column
        // tables where an empty line is a Missing row.
        if (line.empty() && pos >= text.size() && width > 1) break;
        auto fields = split_csv_line(line, lineno);

        if (first_line) {
            first_line = false;
            bool all_numeric = true;
            for (const auto& f : fields) {
                double v;
                if (!f.empty() && !parse_finite_double(f, &v)) {
                    all_numeric = false;
                    break;
                }
            }
            if (!all_numeric) {
                table.column_names = std::move(fields);
                width = table.column_names.size();
                continue;
            }
            width = fields.size();
        }

        if (fields.size() != width)
            throw DataError("CSV line " + std::to_string(lineno) + ": expected " +
                            std::to_string(width) + " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) {
            if (f.empty()) {
                row.push_back(kMissing);
            } else {
                double v;
                if (!parse_finite_double(f, &v))
                    throw DataError("CSV line " + std::to_string(lineno) + ": bad number '" + f + "'");
                row.push_back(v);
            }
        }
        table.data.push_back(std::move(row));
    }
    return table;
}

KpiTable import_csv(const std::string& path) {
    return parse_csv(read_file(path));
}

} // namespace kpifc
