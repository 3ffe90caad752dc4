#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "kpifc/json.hpp"
#include "kpifc/rng.hpp"

using namespace kpifc;

TEST_CASE("minimal document") {
    const JsonNode doc = parse_json("{\"a\": 1}");
    REQUIRE(doc.is_object());
    REQUIRE(doc.members().size() == 1);
    CHECK(doc.members()[0].first == "a");
    CHECK(doc.members()[0].second.as_number() == 1.0);
}

TEST_CASE("empty input is malformed") {
    CHECK_THROWS_AS(parse_json(""), DataError);
    CHECK_THROWS_AS(parse_json("   \n  "), DataError);
}

TEST_CASE("member order and duplicate keys are preserved") {
    const JsonNode doc = parse_json(R"({"z": 1, "a": 2, "z": 3})");
    const auto& members = doc.members();
    REQUIRE(members.size() == 3);
    CHECK(members[0].first == "z");
    CHECK(members[0].second.as_number() == 1.0);
    CHECK(members[1].first == "a");
    CHECK(members[2].first == "z");
    CHECK(members[2].second.as_number() == 3.0);
}

TEST_CASE("scalars and containers") {
    const JsonNode doc = parse_json(R"({"b": true, "n": null, "s": "hi", "arr": [1, -2.5e3, 0.25]})");
    CHECK(doc.find("b")->as_bool());
    CHECK(doc.find("n")->is_null());
    CHECK(doc.find("s")->as_string() == "hi");
    const auto& arr = doc.find("arr")->items();
    REQUIRE(arr.size() == 3);
    CHECK(arr[1].as_number() == -2500.0);
    CHECK(arr[2].as_number() == 0.25);
}

TEST_CASE("string escapes") {
    const JsonNode doc = parse_json(R"(["a\"b", "\n\t\\", "A", "é", "😀"])");
    const auto& items = doc.items();
    CHECK(items[0].as_string() == "a\"b");
    CHECK(items[1].as_string() == "\n\t\\");
    CHECK(items[2].as_string() == "A");
    CHECK(items[3].as_string() == "\xc3\xa9");
    CHECK(items[4].as_string() == "\xf0\x9f\x98\x80");
}

TEST_CASE("malformed documents report line and byte offset") {
    try {
        parse_json("{\"a\": 1,\n  \"b\" 2}");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("byte") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_json("{\"a\": 1} tail"), DataError);
    CHECK_THROWS_AS(parse_json("[1, 2"), DataError);
    CHECK_THROWS_AS(parse_json("{\"a\":}"), DataError);
    CHECK_THROWS_AS(parse_json("01"), DataError);
    CHECK_THROWS_AS(parse_json("[1e999]"), DataError);
}

TEST_CASE("depth limit") {
    std::string deep;
    for (int i = 0; i < 300; ++i) deep += "[";
    for (int i = 0; i < 300; ++i) deep += "]";
    CHECK_THROWS_WITH_AS(parse_json(deep), doctest::Contains("depth limit"), DataError);

    ParseOptions opts;
    opts.depth_limit = 400;
    CHECK_NOTHROW(parse_json(deep, opts));
}

namespace {

JsonNode random_tree(Rng& rng, int depth) {
    const auto roll = rng.below(depth <= 0 ? 4 : 6);
    switch (roll) {
        case 0: return JsonNode(rng.uniform(-100.0, 100.0));
        case 1: return JsonNode(rng.below(2) == 0);
        case 2: return JsonNode(nullptr);
        case 3: return JsonNode("s" + std::to_string(rng.below(50)));
        case 4: {
            JsonNode arr = JsonNode::array();
            const auto n = rng.below(4);
            for (std::uint64_t i = 0; i < n; ++i) arr.push_back(random_tree(rng, depth - 1));
            return arr;
        }
        default: {
            JsonNode obj = JsonNode::object();
            static const char* keys[] = {"a", "b", "k", "sinr", "ues"};
            const auto n = rng.below(4);
            for (std::uint64_t i = 0; i < n; ++i)
                obj.set(keys[rng.below(5)], random_tree(rng, depth - 1));
            return obj;
        }
    }
}

} // namespace

TEST_CASE("serialize/parse round-trip on random trees") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const JsonNode tree = random_tree(rng, 5);
        CHECK(parse_json(write_json(tree)) == tree);
        CHECK(parse_json(write_json(tree, {.indent = 2})) == tree);
    }
}

TEST_CASE("doubles round-trip bit-exactly") {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const double x = rng.normal(0.0, 1e6);
        const JsonNode parsed = parse_json(format_double(x));
        CHECK(parsed.as_number() == x);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-0.5) == "-0.5");
}

TEST_CASE("load_document reads files and reports I/O errors") {
    const auto path = std::filesystem::temp_directory_path() / "kpifc_test_doc.json";
    write_file(path.string(), "{\"ues\": [{\"sinr\": 12.5}]}");
    const JsonNode doc = load_document(path.string());
    CHECK(doc.find("ues")->items()[0].find("sinr")->as_number() == 12.5);
    std::filesystem::remove(path);

    CHECK_THROWS_WITH_AS(load_document("/nonexistent/kpifc.json"),
                         doctest::Contains("/nonexistent/kpifc.json"), DataError);
}
