#include "kpifc/json.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kpifc {
namespace {

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& opts) : text_(text), opts_(opts) {}

    JsonNode parse_document() {
        JsonNode root = parse_value(0);
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters after document");
        return root;
    }

private:
    std::string_view text_;
    ParseOptions opts_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError("malformed JSON at line " + std::to_string(line_) + ", byte " +
                        std::to_string(pos_) + ": " + msg);
    }

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    void skip_ws() {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
                advance();
            else
                break;
        }
    }

    void expect(char c) {
        if (eof()) fail(std::string("unexpected end of input, expected '") + c + "'");
        if (peek() != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    JsonNode parse_value(std::size_t depth) {
        if (depth > opts_.depth_limit)
            throw DataError("depth limit " + std::to_string(opts_.depth_limit) +
                            " exceeded at line " + std::to_string(line_) + ", byte " +
                            std::to_string(pos_));
        skip_ws();
        if (eof()) fail("unexpected end of input");
        switch (peek()) {
            case '{': return parse_object(depth);
            case '[': return parse_array(depth);
            case '"': return JsonNode(parse_string());
            case 't': parse_keyword("true"); return JsonNode(true);
            case 'f': parse_keyword("false"); return JsonNode(false);
            case 'n': parse_keyword("null"); return JsonNode(nullptr);
            default: return parse_number();
        }
    }

    void parse_keyword(std::string_view kw) {
        if (text_.substr(pos_, kw.size()) != kw) fail("invalid literal");
        for (std::size_t i = 0; i < kw.size(); ++i) advance();
    }

    JsonNode parse_object(std::size_t depth) {
        expect('{');
        JsonNode::Object members;
        skip_ws();
        if (!eof() && peek() == '}') {
            advance();
            return JsonNode(std::move(members));
        }
        while (true) {
            skip_ws();
            if (eof() || peek() != '"') fail("expected object key");
            std::string key = parse_string();
            skip_ws();
            expect(':');
            members.emplace_back(std::move(key), parse_value(depth + 1));
            skip_ws();
            if (eof()) fail("unexpected end of input in object");
            if (peek() == ',') {
                advance();
                continue;
            }
            expect('}');
            break;
        }
        return JsonNode(std::move(members));
    }

    JsonNode parse_array(std::size_t depth) {
        expect('[');
        JsonNode::Array items;
        skip_ws();
        if (!eof() && peek() == ']') {
            advance();
            return JsonNode(std::move(items));
        }
        while (true) {
            items.push_back(parse_value(depth + 1));
            skip_ws();
            if (eof()) fail("unexpected end of input in array");
            if (peek() == ',') {
                advance();
                continue;
            }
            expect(']');
            break;
        }
        return JsonNode(std::move(items));
    }

    std::string parse_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof()) fail("unterminated string");
            char c = advance();
            if (c == '"') break;
            if (static_cast<unsigned char>(c) < 0x20) fail("unescaped control character in string");
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (eof()) fail("unterminated escape");
            char e = advance();
            switch (e) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case '/': out.push_back('/'); break;
                case 'b': out.push_back('\b'); break;
                case 'f': out.push_back('\f'); break;
                case 'n': out.push_back('\n'); break;
                case 'r': out.push_back('\r'); break;
                case 't': out.push_back('\t'); break;
                case 'u': append_unicode(out); break;
                default: fail("invalid escape sequence");
            }
        }
        return out;
    }

    unsigned parse_hex4() {
        unsigned value = 0;
        for (int i = 0; i < 4; ++i) {
            if (eof()) fail("unterminated \\u escape");
            char c = advance();
            value <<= 4;
            if (c >= '0' && c <= '9')
                value |= static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f')
                value |= static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F')
                value |= static_cast<unsigned>(c - 'A' + 10);
            else
                fail("invalid hex digit in \\u escape");
        }
        return value;
    }

    void append_unicode(std::string& out) {
        unsigned cp = parse_hex4();
        if (cp >= 0xD800 && cp <= 0xDBFF) {
            if (text_.substr(pos_, 2) != "\\u") fail("unpaired surrogate");
            advance();
            advance();
            unsigned lo = parse_hex4();
            if (lo < 0xDC00 || lo > 0xDFFF) fail("invalid low surrogate");
            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
        } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
            fail("unpaired surrogate");
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }

    JsonNode parse_number() {
        const std::size_t start = pos_;
        if (!eof() && peek() == '-') advance();
        if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("invalid value");
        if (peek() == '0') {
            advance();
        } else {
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if (!eof() && peek() == '.') {
            advance();
            if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
                fail("digit expected after decimal point");
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if (!eof() && (peek() == 'e' || peek() == 'E')) {
            advance();
            if (!eof() && (peek() == '+' || peek() == '-')) advance();
            if (eof() || !std::isdigit(static_cast<unsigned char>(peek())))
                fail("digit expected in exponent");
            while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        double value = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec == std::errc::result_out_of_range) fail("number out of range");
        if (ec != std::errc() || ptr != last) fail("invalid number");
        return JsonNode(value);
    }
};

void write_escaped(std::string& out, const std::string& s) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void write_node(std::string& out, const JsonNode& node, const WriteOptions& opts, int level) {
    const bool pretty = opts.indent > 0;
    auto newline_indent = [&](int lvl) {
        if (!pretty) return;
        out.push_back('\n');
        out.append(static_cast<std::size_t>(opts.indent) * lvl, ' ');
    };

    if (node.is_null()) {
        out += "null";
    } else if (node.is_bool()) {
        out += node.as_bool() ? "true" : "false";
    } else if (node.is_number()) {
        const double x = node.as_number();
        if (!std::isfinite(x)) throw DataError("cannot serialize non-finite number as JSON");
        out += format_double(x);
    } else if (node.is_string()) {
        write_escaped(out, node.as_string());
    } else if (node.is_array()) {
        const auto& items = node.items();
        if (items.empty()) {
            out += "[]";
            return;
        }
        out.push_back('[');
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (i) out.push_back(',');
            newline_indent(level + 1);
            write_node(out, items[i], opts, level + 1);
        }
        newline_indent(level);
        out.push_back(']');
    } else {
        const auto& members = node.members();
        if (members.empty()) {
            out += "{}";
            return;
        }
        out.push_back('{');
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i) out.push_back(',');
            newline_indent(level + 1);
            write_escaped(out, members[i].first);
            out.push_back(':');
            if (pretty) out.push_back(' ');
            write_node(out, members[i].second, opts, level + 1);
        }
        newline_indent(level);
        out.push_back('}');
    }
}

} // namespace

JsonNode parse_json(std::string_view text, const ParseOptions& opts) {
    return Parser(text, opts).parse_document();
}

JsonNode load_document(const std::string& path, const ParseOptions& opts) {
    return parse_json(read_file(path), opts);
}

std::string write_json(const JsonNode& node, const WriteOptions& opts) {
    std::string out;
    write_node(out, node, opts, 0);
    return out;
}

std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("I/O error reading file: " + path);
    return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("I/O error writing file: " + path);
}

} // namespace kpifc
