#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "kpifc/eval.hpp"
#include "kpifc/rng.hpp"

using namespace kpifc;

namespace {

namespace fsys = std::filesystem;

std::vector<Eigen::MatrixXd> random_tensors(Rng& rng, std::size_t count, Eigen::Index rows,
                                            Eigen::Index cols, double scale) {
    std::vector<Eigen::MatrixXd> out(count);
    for (auto& m : out) {
        m.resize(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, scale);
    }
    return out;
}

} // namespace

TEST_CASE("rmse examples") {
    Rng rng(7);
    auto label = random_tensors(rng, 4, 2, 3, 10.0);
    CHECK(rmse(label, label) == 0.0);

    auto shifted = label;
    for (auto& m : shifted) m.array() += 2.5;
    CHECK(rmse(shifted, label) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("rmse equals the naive flatten-loop recomputation") {
    Rng rng(13);
    const auto pred = random_tensors(rng, 5, 3, 2, 4.0);
    const auto label = random_tensors(rng, 5, 3, 2, 4.0);
    double sum = 0.0;
    long count = 0;
    for (std::size_t w = 0; w < pred.size(); ++w)
        for (Eigen::Index i = 0; i < pred[w].rows(); ++i)
            for (Eigen::Index j = 0; j < pred[w].cols(); ++j) {
                const double diff = pred[w](i, j) - label[w](i, j);
                sum += diff * diff;
                ++count;
            }
    const double expected = std::sqrt(sum / static_cast<double>(count));
    CHECK(rmse(pred, label) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rmse rejects mismatched or empty input") {
    Rng rng(17);
    const auto a = random_tensors(rng, 2, 2, 2, 1.0);
    const auto b = random_tensors(rng, 3, 2, 2, 1.0);
    CHECK_THROWS_AS(rmse(a, b), ConfigError);
    CHECK_THROWS_AS(rmse({}, {}), ConfigError);
    auto c = a;
    c[1].resize(3, 2);
    c[1].setZero();
    CHECK_THROWS_AS(rmse(a, c), ConfigError);
}

namespace {

// Model with zeroed parameters predicts 0 in scaled space for any input.
ModelState zeroed_model(Eigen::Index d, Eigen::Index c, Eigen::Index t) {
    ModelConfig config;
    config.units = 2;
    config.fc_base = 1;
    config.out_features = c;
    config.time_steps = t;
    config.in_features = d;
    ModelState state = init_model(config);
    visit_tensors(state.params, [](const std::string&, auto& tensor) { tensor.setZero(); });
    return state;
}

} // namespace

TEST_CASE("evaluate: zeroed model on constant data has zero RMSE") {
    // Constant training data makes every feature degenerate: labels scale to
    // 0, the zeroed model predicts 0, and both invert to x_min.
    const Eigen::Index t = 3;
    Eigen::MatrixXd series = Eigen::MatrixXd::Constant(20, 1, 7.5);
    const ScalerParams scaler = fit_scaler(series);
    const Eigen::MatrixXd scaled = transform(scaler, series);
    const WindowSpec spec{.w_in = t, .w_lbl = 1, .shift = 1};
    const FeatureSelector sel = FeatureSelector::head(1);
    const WindowSet ws = make_windows(scaled, spec, sel);

    const ModelState state = zeroed_model(1, 1, t);
    const PhaseEval eval = evaluate(state, ws, scaler, sel, 1);
    CHECK(eval.rmse == 0.0);
    CHECK(eval.n_samples == ws.count());

    // Pure: repeated calls agree bit-exactly.
    const PhaseEval again = evaluate(state, ws, scaler, sel, 1);
    CHECK(eval.rmse == again.rmse);
}

TEST_CASE("evaluate: original-unit residuals equal scaled residuals times the feature range") {
    Rng rng(23);
    Eigen::MatrixXd series(40, 2);
    for (Eigen::Index i = 0; i < series.size(); ++i) series.data()[i] = rng.normal(10.0, 5.0);
    const ScalerParams scaler = fit_scaler(series);
    const Eigen::MatrixXd scaled = transform(scaler, series);
    const WindowSpec spec{.w_in = 4, .w_lbl = 1, .shift = 1};
    const FeatureSelector sel = FeatureSelector::head(2);
    const WindowSet ws = make_windows(scaled, spec, sel);

    ModelConfig config;
    config.units = 3;
    config.fc_base = 2;
    config.out_features = 2;
    config.time_steps = 4;
    config.in_features = 2;
    config.seed = 5;
    const ModelState state = init_model(config);

    const auto preds_scaled = predict(state, ws, 1);
    const PhaseEval eval = evaluate(state, ws, scaler, sel, 1);

    // Affine identity, per feature: orig residual = scaled residual * range.
    std::vector<double> sum(2, 0.0);
    for (std::size_t i = 0; i < preds_scaled.size(); ++i)
        for (Eigen::Index j = 0; j < 2; ++j) {
            const double range = scaler.x_max[j] - scaler.x_min[j];
            const double diff = (preds_scaled[i](0, j) - ws.pairs[i].label(0, j)) * range;
            sum[static_cast<std::size_t>(j)] += diff * diff;
        }
    for (Eigen::Index j = 0; j < 2; ++j) {
        const double expected = std::sqrt(sum[static_cast<std::size_t>(j)] /
                                          static_cast<double>(preds_scaled.size()));
        CHECK(eval.rmse_per_feature[static_cast<std::size_t>(j)] ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("persistence baseline copies the last observed input row") {
    Eigen::MatrixXd series(10, 2);
    for (Eigen::Index i = 0; i < series.rows(); ++i) {
        series(i, 0) = static_cast<double>(i);
        series(i, 1) = 100.0 + static_cast<double>(i);
    }
    const WindowSpec spec{.w_in = 3, .w_lbl = 2, .shift = 2};
    FeatureSelector sel;
    sel.indices = {1};
    const WindowSet ws = make_windows(series, spec, sel);
    const auto preds = persistence_predictions(ws, sel, 2);
    REQUIRE(preds.size() == ws.pairs.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double last_observed = ws.pairs[i].input(2, 1);
        CHECK(preds[i](0, 0) == last_observed);
        CHECK(preds[i](1, 0) == last_observed);
    }
}

TEST_CASE("connectivity classification") {
    SUBCASE("all connected, forecasts well above threshold") {
        const std::vector<double> pred(10, 15.0);
        const std::vector<double> mask(10, 0.0);
        const ConnectivityReport report = classify_connectivity(pred, mask, 0.0, 8.0);
        CHECK(report.threshold == 4.0);
        CHECK(report.accuracy == 1.0);
        CHECK(report.true_positive == 10);
        CHECK(report.true_negative == 0);
    }
    SUBCASE("forecast exactly at kappa during a true disconnection is disconnected") {
        const std::vector<double> pred = {0.0};
        const std::vector<double> mask = {1.0};
        const ConnectivityReport report = classify_connectivity(pred, mask, 0.0, 8.0);
        CHECK(report.accuracy == 1.0);
        CHECK(report.true_negative == 1);
    }
    SUBCASE("counts match a per-step oracle on random sequences") {
        Rng rng(31);
        std::vector<double> pred, mask;
        for (int i = 0; i < 500; ++i) {
            const bool disc = rng.uniform() < 0.2;
            mask.push_back(disc ? 1.0 : 0.0);
            pred.push_back(disc ? rng.normal(0.0, 2.0) : rng.normal(14.0, 6.0));
        }
        const ConnectivityReport report = classify_connectivity(pred, mask, 0.0, 8.0);
        long correct = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const bool predicted_connected = pred[i] > 4.0;
            const bool actually_connected = mask[i] == 0.0;
            if (predicted_connected == actually_connected) ++correct;
        }
        CHECK(report.accuracy ==
              doctest::Approx(static_cast<double>(correct) / 500.0).epsilon(1e-12));
        CHECK(report.true_positive + report.true_negative + report.false_positive +
                  report.false_negative ==
              500);
    }
    SUBCASE("raising the floor never flips disconnected to connected") {
        Rng rng(37);
        std::vector<double> pred, mask;
        for (int i = 0; i < 200; ++i) {
            pred.push_back(rng.normal(6.0, 6.0));
            mask.push_back(rng.uniform() < 0.3 ? 1.0 : 0.0);
        }
        const ConnectivityReport low = classify_connectivity(pred, mask, 0.0, 6.0);
        const ConnectivityReport high = classify_connectivity(pred, mask, 0.0, 12.0);
        for (std::size_t i = 0; i < pred.size(); ++i)
            if (low.predicted_connected[i] == 0) CHECK(high.predicted_connected[i] == 0);
    }
    SUBCASE("floor at or below kappa is a config error") {
        CHECK_THROWS_AS(classify_connectivity({1.0}, {0.0}, 0.0, 0.0), ConfigError);
        CHECK_THROWS_AS(classify_connectivity({1.0}, {0.0}, 5.0, 2.0), ConfigError);
    }
}

TEST_CASE("connectivity report serializes counts and sequences") {
    const ConnectivityReport report = classify_connectivity({9.0, 1.0}, {0.0, 1.0}, 0.0, 8.0);
    const JsonNode doc = parse_json(report.to_json());
    CHECK(doc.find("accuracy")->as_number() == 1.0);
    CHECK(doc.find("predicted_connected")->items().size() == 2);
    CHECK(doc.find("actual_connected")->items()[1].as_number() == 0.0);
}

TEST_CASE("forecast plot draws coincident polylines for equal series") {
    const std::vector<double> series = {1.0, 3.0, 2.0, 5.0, 4.0};
    const std::vector<double> mask = {0.0, 0.0, 1.0, 1.0, 0.0};
    const auto dir = fsys::temp_directory_path();
    const std::string svg_path = (dir / "kpifc_test_plot.svg").string();
    const std::string csv_path = (dir / "kpifc_test_plot.csv").string();
    emit_forecast_plot(series, series, mask, svg_path, csv_path);

    const std::string svg = read_file(svg_path);
    const std::string needle = "points=\"";
    const auto first = svg.find(needle);
    REQUIRE(first != std::string::npos);
    const auto second = svg.find(needle, first + 1);
    REQUIRE(second != std::string::npos);
    const auto first_end = svg.find('"', first + needle.size());
    const auto second_end = svg.find('"', second + needle.size());
    CHECK(svg.substr(first + needle.size(), first_end - first - needle.size()) ==
          svg.substr(second + needle.size(), second_end - second - needle.size()));
    CHECK(svg.find("<rect") != std::string::npos); // disconnection shading

    const std::string csv = read_file(csv_path);
    CHECK(csv.substr(0, csv.find('\n')) == "time,actual,predicted");
    long rows = -1; // header
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 5);

    fsys::remove(svg_path);
    fsys::remove(csv_path);
}

TEST_CASE("eval report JSON structure") {
    EvalReport report;
    report.train.rmse = 1.5;
    report.train.rmse_per_feature = {1.5};
    report.train.n_samples = 100;
    report.test.rmse = 2.5;
    report.test.rmse_per_feature = {2.5};
    report.test.n_samples = 10;
    report.persistence_rmse_test = 3.0;
    const JsonNode doc = parse_json(report.to_json());
    CHECK(doc.find("train")->find("rmse")->as_number() == 1.5);
    CHECK(doc.find("test")->find("n_samples")->as_number() == 10.0);
    CHECK(doc.find("persistence_rmse_test")->as_number() == 3.0);
}
