#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "kpifc/rng.hpp"
#include "kpifc/windowing.hpp"

using namespace kpifc;

namespace {

Eigen::MatrixXd ramp_series(Eigen::Index n, Eigen::Index d) {
    Eigen::MatrixXd series(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) series(i, j) = static_cast<double>(i * 100 + j);
    return series;
}

// Brute-force enumeration of valid (input, label) index pairs straight from
// the slice definitions, independent of make_windows.
struct IndexPair {
    Eigen::Index input_start;
    Eigen::Index label_start;
};

std::vector<IndexPair> enumerate_pairs(Eigen::Index n, const WindowSpec& spec) {
    std::vector<IndexPair> pairs;
    for (Eigen::Index t = 0;; ++t) {
        const Eigen::Index input_end = t + spec.w_in - 1;
        const Eigen::Index label_start = t + spec.w_tot() - spec.w_lbl;
        const Eigen::Index label_end = t + spec.w_tot() - 1;
        if (label_end >= n || input_end >= n) break;
        // The count formula stops w_lbl-1 windows earlier than the last
        // feasible label slice; enumerate with the same bound.
        if (t >= n - spec.w_tot() - spec.w_lbl + 1) break;
        pairs.push_back({t, label_start});
    }
    return pairs;
}

} // namespace

TEST_CASE("window count formula example") {
    // N=10, w_in=3, s=1, w_lbl=1: w_tot=4, M = 10-4-1+1 = 6.
    const WindowSpec spec{.w_in = 3, .w_lbl = 1, .shift = 1};
    CHECK(spec.w_tot() == 4);
    CHECK(window_count(10, spec) == 6);
    const WindowSet ws = make_windows(ramp_series(10, 2), spec, FeatureSelector::head(2));
    CHECK(ws.count() == 6);
}

TEST_CASE("degenerate self-labeling window") {
    // w_in=1, s=0, w_lbl=1: X_t and Y_t are both row t; M = N-1.
    const WindowSpec spec{.w_in = 1, .w_lbl = 1, .shift = 0};
    const Eigen::MatrixXd series = ramp_series(8, 1);
    const WindowSet ws = make_windows(series, spec, FeatureSelector::head(1));
    CHECK(ws.count() == 7);
    for (Eigen::Index t = 0; t < ws.count(); ++t) {
        CHECK(ws.pairs[static_cast<std::size_t>(t)].input(0, 0) == series(t, 0));
        CHECK(ws.pairs[static_cast<std::size_t>(t)].label(0, 0) == series(t, 0));
    }
}

TEST_CASE("window contents match independently recomputed slices") {
    const Eigen::Index n_values[] = {10, 50, 100};
    const Eigen::Index w_in_values[] = {1, 3, 10};
    const Eigen::Index s_values[] = {0, 1, 5};
    const Eigen::Index w_lbl_values[] = {1, 3};
    const Eigen::MatrixXd series = ramp_series(100, 3);
    const FeatureSelector sel = FeatureSelector::head(3);

    for (Eigen::Index n : n_values)
        for (Eigen::Index w_in : w_in_values)
            for (Eigen::Index s : s_values)
                for (Eigen::Index w_lbl : w_lbl_values) {
                    const WindowSpec spec{.w_in = w_in, .w_lbl = w_lbl, .shift = s};
                    if (w_lbl > spec.w_tot()) continue;
                    const Eigen::MatrixXd sub = series.topRows(n);
                    const auto expected = enumerate_pairs(n, spec);
                    if (expected.empty()) {
                        CHECK_THROWS_AS(make_windows(sub, spec, sel), DataError);
                        CHECK(window_count(n, spec) <= 0);
                        continue;
                    }
                    const WindowSet ws = make_windows(sub, spec, sel);
                    REQUIRE(ws.count() == static_cast<Eigen::Index>(expected.size()));
                    REQUIRE(ws.count() == window_count(n, spec));
                    for (std::size_t i = 0; i < expected.size(); ++i) {
                        const auto& pair = ws.pairs[i];
                        CHECK(pair.input == sub.middleRows(expected[i].input_start, w_in));
                        CHECK(pair.label == sub.middleRows(expected[i].label_start, w_lbl));
                    }
                }
}

TEST_CASE("window error names the required minimum length") {
    const WindowSpec spec{.w_in = 10, .w_lbl = 3, .shift = 5};
    CHECK_THROWS_WITH_AS(make_windows(ramp_series(10, 1), spec, FeatureSelector::head(1)),
                         doctest::Contains("18"), DataError); // w_tot + w_lbl = 18
}

TEST_CASE("label feature selection projects columns") {
    const WindowSpec spec{.w_in = 2, .w_lbl = 1, .shift = 1};
    FeatureSelector sel;
    sel.indices = {2, 0};
    const Eigen::MatrixXd series = ramp_series(6, 3);
    const WindowSet ws = make_windows(series, spec, sel);
    const Eigen::Index label_row = spec.w_tot() - 1; // first window, t=0
    CHECK(ws.pairs[0].label(0, 0) == series(label_row, 2));
    CHECK(ws.pairs[0].label(0, 1) == series(label_row, 0));
    // Inputs keep all d columns.
    CHECK(ws.pairs[0].input.cols() == 3);
}

TEST_CASE("selector validation") {
    const Eigen::MatrixXd series = ramp_series(10, 2);
    const WindowSpec spec{.w_in = 2, .w_lbl = 1, .shift = 0};
    FeatureSelector dup;
    dup.indices = {0, 0};
    CHECK_THROWS_AS(make_windows(series, spec, dup), ConfigError);
    FeatureSelector out_of_range;
    out_of_range.indices = {2};
    CHECK_THROWS_AS(make_windows(series, spec, out_of_range), ConfigError);
    FeatureSelector empty;
    CHECK_THROWS_AS(make_windows(series, spec, empty), ConfigError);
}

TEST_CASE("window spec validation") {
    CHECK_THROWS_AS((WindowSpec{.w_in = 0, .w_lbl = 1, .shift = 0}.validate()), ConfigError);
    CHECK_THROWS_AS((WindowSpec{.w_in = 1, .w_lbl = 0, .shift = 0}.validate()), ConfigError);
    CHECK_THROWS_AS((WindowSpec{.w_in = 1, .w_lbl = 1, .shift = -1}.validate()), ConfigError);
    CHECK_THROWS_AS((WindowSpec{.w_in = 2, .w_lbl = 4, .shift = 1}.validate()), ConfigError);
    CHECK_NOTHROW((WindowSpec{.w_in = 2, .w_lbl = 3, .shift = 1}.validate()));
}

TEST_CASE("batch sizes and partition") {
    const WindowSpec spec{.w_in = 3, .w_lbl = 1, .shift = 1};
    const WindowSet ws = make_windows(ramp_series(10, 1), spec, FeatureSelector::head(1)); // M=6
    const auto batches = batch(ws, 4, false, 0);
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].size() == 4);
    CHECK(batches[1].size() == 2);
    CHECK((batches[0] == std::vector<Eigen::Index>{0, 1, 2, 3}));

    // Union over shuffled batches covers every pair exactly once.
    const auto shuffled = batch(ws, 4, true, 77);
    std::set<Eigen::Index> seen;
    for (const auto& b : shuffled)
        for (Eigen::Index idx : b) CHECK(seen.insert(idx).second);
    CHECK(seen.size() == 6);
}

TEST_CASE("shuffle is a deterministic function of the seed") {
    const WindowSpec spec{.w_in = 2, .w_lbl = 1, .shift = 0};
    const WindowSet ws = make_windows(ramp_series(40, 1), spec, FeatureSelector::head(1));
    CHECK(batch(ws, 8, true, 123) == batch(ws, 8, true, 123));
    CHECK(batch(ws, 8, true, 123) != batch(ws, 8, true, 124));
}
