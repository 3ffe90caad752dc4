#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "kpifc/error.hpp"

namespace kpifc {

// Parse tree of a JSON document. Object members keep source-document order
// and duplicate keys are retained as separate members; the extraction
// semantics downstream depend on encounter order, so neither may be
// normalized away.
class JsonNode {
public:
    using Member = std::pair<std::string, JsonNode>;
    using Object = std::vector<Member>;
    using Array = std::vector<JsonNode>;

    JsonNode() : value_(nullptr) {}
    JsonNode(std::nullptr_t) : value_(nullptr) {}
    JsonNode(bool b) : value_(b) {}
    JsonNode(double x) : value_(x) {}
    JsonNode(int x) : value_(static_cast<double>(x)) {}
    JsonNode(long x) : value_(static_cast<double>(x)) {}
    JsonNode(const char* s) : value_(std::string(s)) {}
    JsonNode(std::string s) : value_(std::move(s)) {}
    JsonNode(Array a) : value_(std::move(a)) {}
    JsonNode(Object o) : value_(std::move(o)) {}

    static JsonNode object() { return JsonNode(Object{}); }
    static JsonNode array() { return JsonNode(Array{}); }

    bool is_null() const { return std::holds_alternative<std::nullptr_t>(value_); }
    bool is_bool() const { return std::holds_alternative<bool>(value_); }
    bool is_number() const { return std::holds_alternative<double>(value_); }
    bool is_string() const { return std::holds_alternative<std::string>(value_); }
    bool is_array() const { return std::holds_alternative<Array>(value_); }
    bool is_object() const { return std::holds_alternative<Object>(value_); }

    bool as_bool() const { return std::get<bool>(value_); }
    double as_number() const { return std::get<double>(value_); }
    const std::string& as_string() const { return std::get<std::string>(value_); }
    const Array& items() const { return std::get<Array>(value_); }
    Array& items() { return std::get<Array>(value_); }
    const Object& members() const { return std::get<Object>(value_); }
    Object& members() { return std::get<Object>(value_); }

    // First member with the given key, or nullptr.
    const JsonNode* find(std::string_view key) const {
        if (!is_object()) return nullptr;
        for (const auto& [k, v] : members())
            if (k == key) return &v;
        return nullptr;
    }

    JsonNode& push_back(JsonNode v) {
        items().push_back(std::move(v));
        return items().back();
    }

    JsonNode& set(std::string key, JsonNode v) {
        members().emplace_back(std::move(key), std::move(v));
        return members().back().second;
    }

    bool operator==(const JsonNode& other) const { return value_ == other.value_; }

private:
    std::variant<std::nullptr_t, bool, double, std::string, Array, Object> value_;
};

struct ParseOptions {
    std::size_t depth_limit = 256;
};

// Parse a complete document from memory. Reports malformed input with
// 0-based byte offset and 1-based line number; nesting beyond
// opts.depth_limit raises DataError ("depth limit exceeded").
JsonNode parse_json(std::string_view text, const ParseOptions& opts = {});

// Load(p): read the file at `path` and parse it.
JsonNode load_document(const std::string& path, const ParseOptions& opts = {});

struct WriteOptions {
    int indent = 0; // 0 = compact
};

// Doubles are written in shortest round-trip form, so serialize/parse is
// bit-exact for finite values; non-finite numbers are rejected.
std::string write_json(const JsonNode& node, const WriteOptions& opts = {});

// Shortest round-trip decimal form of a double (also used by the CSV writer).
std::string format_double(double x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace kpifc
