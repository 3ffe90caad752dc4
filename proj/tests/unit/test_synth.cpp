#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "kpifc/extract.hpp"
#include "kpifc/preprocess.hpp"
#include "kpifc/synth.hpp"

using namespace kpifc;

namespace {

namespace fsys = std::filesystem;

TraceConfig small_config() {
    TraceConfig cfg;
    cfg.duration = 400;
    cfg.seed = 42;
    return cfg;
}

} // namespace

TEST_CASE("config validation") {
    TraceConfig cfg = small_config();
    cfg.ar_coeff = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.nlos_mean_sinr = cfg.los_mean_sinr;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.disc_dwell_mean = 0.5; // neither disabled nor >= 1
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.los_dwell_mean = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("ground truth aligns index-for-index with extraction") {
    const TraceConfig cfg = small_config();
    const Trace trace = generate_trace(cfg);
    REQUIRE(trace.regimes.size() == 400);
    REQUIRE(trace.sinr.size() == 400);

    const RaggedSeries series = extract_two_layer(trace.document, "ues", "sinr");
    REQUIRE(series.rows.size() == 400);
    CHECK(series.coercion_failures == 0);
    long missing_rows = 0;
    for (std::size_t t = 0; t < series.rows.size(); ++t) {
        if (trace.regimes[t] == Regime::Disconnected) {
            CHECK(series.rows[t].empty());
            CHECK(is_missing(trace.sinr[t]));
            ++missing_rows;
        } else {
            REQUIRE(series.rows[t].size() == 1);
            CHECK(series.rows[t][0] == trace.sinr[t]);
        }
    }
    CHECK(missing_rows > 0); // dwell 5s out of 55s: expect some disconnections

    // Exactly k Missing entries post-extraction for k disconnected seconds.
    const KpiTable table = pad_stack(series);
    long missing_cells = 0;
    for (const auto& row : table.data)
        for (double v : row) missing_cells += is_missing(v) ? 1 : 0;
    CHECK(missing_cells == missing_rows);
}

TEST_CASE("disabled disconnections yield no Missing values") {
    TraceConfig cfg = small_config();
    cfg.disc_dwell_mean = 0.0;
    const Trace trace = generate_trace(cfg);
    const RaggedSeries series = extract_two_layer(trace.document, "ues", "sinr");
    for (const auto& row : series.rows) {
        REQUIRE(row.size() == 1);
        CHECK(!is_missing(row[0]));
    }
}

TEST_CASE("zero noise and zero AR give piecewise-constant SINR at regime means") {
    TraceConfig cfg = small_config();
    cfg.noise_sigma = 0.0;
    cfg.ar_coeff = 0.0;
    const Trace trace = generate_trace(cfg);
    for (std::size_t t = 0; t < trace.regimes.size(); ++t) {
        if (trace.regimes[t] == Regime::Los)
            CHECK(trace.sinr[t] == cfg.los_mean_sinr);
        else if (trace.regimes[t] == Regime::Nlos)
            CHECK(trace.sinr[t] == cfg.nlos_mean_sinr);
    }
}

TEST_CASE("derived features are affine in SINR") {
    TraceConfig cfg = small_config();
    cfg.derived = {default_derived_feature("rssi")};
    cfg.derived[0].noise = 0.0;
    const Trace trace = generate_trace(cfg);
    const RaggedSeries sinr = extract_two_layer(trace.document, "ues", "sinr");
    const RaggedSeries rssi = extract_two_layer(trace.document, "ues", "rssi");
    REQUIRE(sinr.rows.size() == rssi.rows.size());
    for (std::size_t t = 0; t < sinr.rows.size(); ++t) {
        REQUIRE(sinr.rows[t].size() == rssi.rows[t].size());
        if (!sinr.rows[t].empty())
            CHECK(rssi.rows[t][0] ==
                  doctest::Approx(1.2 * sinr.rows[t][0] - 90.0).epsilon(1e-12));
    }
}

TEST_CASE("trace write/load round-trip") {
    const TraceConfig cfg = small_config();
    const Trace trace = generate_trace(cfg);
    const auto dir = fsys::temp_directory_path();
    const std::string path_a = (dir / "kpifc_trace_a.json").string();
    const std::string path_b = (dir / "kpifc_trace_b.json").string();
    write_trace(trace.document, path_a);

    const JsonNode loaded = load_document(path_a);
    CHECK(loaded == trace.document);
    const RaggedSeries series = extract_two_layer(loaded, "ues", "sinr");
    for (std::size_t t = 0; t < series.rows.size(); ++t)
        if (!series.rows[t].empty()) CHECK(series.rows[t][0] == trace.sinr[t]);

    // Same seed, byte-identical file.
    const Trace again = generate_trace(cfg);
    write_trace(again.document, path_b);
    CHECK(read_file(path_a) == read_file(path_b));
    fsys::remove(path_a);
    fsys::remove(path_b);
}

TEST_CASE("generated traces pass the full preprocessing pipeline") {
    TraceConfig cfg = small_config();
    cfg.duration = 600;
    cfg.derived = {default_derived_feature("rssi"), default_derived_feature("phr")};
    const Trace trace = generate_trace(cfg);

    KpiTable combined;
    std::size_t coercions = 0;
    for (const char* key : {"sinr", "rssi", "phr"}) {
        const RaggedSeries series = extract_two_layer(trace.document, "ues", key);
        coercions += series.coercion_failures;
        const KpiTable table = pad_stack(series);
        if (combined.data.empty()) combined.data.assign(table.rows(), {});
        for (std::size_t i = 0; i < table.rows(); ++i)
            combined.data[i].insert(combined.data[i].end(), table.data[i].begin(),
                                    table.data[i].end());
    }
    CHECK(coercions == 0);

    const ImputeResult imputed = impute(combined, ImputationConfig{.kappa = 0.0});
    const SplitResult splits = split(imputed.series, SplitRatios{});
    const ScalerParams scaler = fit_scaler(splits.train);
    const TimeSeriesMatrix scaled = transform(scaler, splits.train);
    CHECK(scaled.allFinite());
    CHECK(imputed.series.rows() == 600);
    CHECK(imputed.series.cols() == 3);
}

TEST_CASE("regime occupancy over a long run matches the dwell proportions") {
    TraceConfig cfg;
    cfg.duration = 100000;
    cfg.seed = 7;
    const std::vector<Regime> regimes = simulate_regimes(cfg, 7);
    long counts[3] = {0, 0, 0};
    for (Regime r : regimes) ++counts[static_cast<int>(r)];
    const double total_dwell = cfg.los_dwell_mean + cfg.nlos_dwell_mean + cfg.disc_dwell_mean;
    const double expected[3] = {cfg.los_dwell_mean / total_dwell, cfg.nlos_dwell_mean / total_dwell,
                                cfg.disc_dwell_mean / total_dwell};
    for (int r = 0; r < 3; ++r) {
        const double occupancy = static_cast<double>(counts[r]) / 100000.0;
        CHECK(std::abs(occupancy - expected[r]) / expected[r] < 0.05);
    }
}

TEST_CASE("regime csv sidecar") {
    const TraceConfig cfg = small_config();
    const Trace trace = generate_trace(cfg);
    const auto path = fsys::temp_directory_path() / "kpifc_regimes.csv";
    write_regime_csv(trace, path.string());
    const std::string csv = read_file(path.string());
    CHECK(csv.substr(0, csv.find('\n')) == "time,regime,sinr");
    long rows = -1;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == cfg.duration);
    fsys::remove(path);
}
