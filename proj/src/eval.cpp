#include "kpifc/eval.hpp"

#include <algorithm>
#include <cmath>

#include "kpifc/json.hpp"

namespace kpifc {

ScalerParams select_scaler_columns(const ScalerParams& scaler, const FeatureSelector& sel) {
    sel.validate(scaler.features());
    ScalerParams out;
    const auto c = static_cast<Eigen::Index>(sel.indices.size());
    out.x_min.resize(c);
    out.x_max.resize(c);
    for (Eigen::Index j = 0; j < c; ++j) {
        out.x_min[j] = scaler.x_min[sel.indices[static_cast<std::size_t>(j)]];
        out.x_max[j] = scaler.x_max[sel.indices[static_cast<std::size_t>(j)]];
    }
    return out;
}

double rmse(const std::vector<Eigen::MatrixXd>& pred, const std::vector<Eigen::MatrixXd>& label) {
    if (pred.size() != label.size()) throw ConfigError("rmse: prediction/label count mismatch");
    if (pred.empty()) throw ConfigError("rmse: empty input");
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].rows() != label[i].rows() || pred[i].cols() != label[i].cols())
            throw ConfigError("rmse: shape mismatch at window " + std::to_string(i));
        sum += (pred[i] - label[i]).squaredNorm();
        count += static_cast<double>(pred[i].size());
    }
    if (count == 0.0) throw ConfigError("rmse: empty input");
    return std::sqrt(sum / count);
}

OrigUnitSeries predict_original_units(const ModelState& state, const WindowSet& windows,
                                      const ScalerParams& scaler, const FeatureSelector& sel,
                                      Eigen::Index w_lbl) {
    if (windows.pairs.empty()) throw ConfigError("evaluate: empty window set");
    if (static_cast<Eigen::Index>(sel.indices.size()) != state.config.out_features)
        throw ConfigError("evaluate: selector width does not match model output width");
    const ScalerParams label_scaler = select_scaler_columns(scaler, sel);

    const std::vector<Eigen::MatrixXd> preds_scaled = predict(state, windows, w_lbl);
    OrigUnitSeries series;
    series.pred.reserve(preds_scaled.size());
    series.label.reserve(preds_scaled.size());
    for (std::size_t i = 0; i < preds_scaled.size(); ++i) {
        series.pred.push_back(inverse_transform(label_scaler, preds_scaled[i]));
        series.label.push_back(inverse_transform(label_scaler, windows.pairs[i].label));
    }
    return series;
}

PhaseEval evaluate(const ModelState& state, const WindowSet& windows, const ScalerParams& scaler,
                   const FeatureSelector& sel, Eigen::Index w_lbl) {
    const OrigUnitSeries series = predict_original_units(state, windows, scaler, sel, w_lbl);
    const auto c = state.config.out_features;

    PhaseEval eval;
    eval.rmse_per_feature.assign(static_cast<std::size_t>(c), 0.0);
    std::vector<double> sum_per_feature(static_cast<std::size_t>(c), 0.0);
    double sum = 0.0;
    long n = 0;
    for (std::size_t i = 0; i < series.pred.size(); ++i) {
        const Eigen::MatrixXd diff = series.pred[i] - series.label[i];
        sum += diff.squaredNorm();
        n += static_cast<long>(diff.size());
        for (Eigen::Index j = 0; j < c; ++j)
            sum_per_feature[static_cast<std::size_t>(j)] += diff.col(j).squaredNorm();
    }
    eval.n_samples = n;
    eval.rmse = std::sqrt(sum / static_cast<double>(n));
    const long n_per_feature = n / static_cast<long>(c);
    for (Eigen::Index j = 0; j < c; ++j)
        eval.rmse_per_feature[static_cast<std::size_t>(j)] =
            std::sqrt(sum_per_feature[static_cast<std::size_t>(j)] / static_cast<double>(n_per_feature));
    return eval;
}

std::vector<Eigen::MatrixXd> persistence_predictions(const WindowSet& windows,
                                                     const FeatureSelector& sel,
                                                     Eigen::Index w_lbl) {
    std::vector<Eigen::MatrixXd> preds;
    preds.reserve(windows.pairs.size());
    const auto c = static_cast<Eigen::Index>(sel.indices.size());
    for (const auto& pair : windows.pairs) {
        const Eigen::Index last = pair.input.rows() - 1;
        Eigen::MatrixXd pred(w_lbl, c);
        for (Eigen::Index j = 0; j < c; ++j)
            pred.col(j).setConstant(pair.input(last, sel.indices[static_cast<std::size_t>(j)]));
        preds.push_back(std::move(pred));
    }
    return preds;
}

ConnectivityReport classify_connectivity(const std::vector<double>& pred_orig,
                                         const std::vector<double>& actual_disconnected,
                                         double kappa, double conn_floor) {
    if (!(conn_floor > kappa))
        throw ConfigError("connectivity: conn_floor must exceed kappa");
    if (pred_orig.size() != actual_disconnected.size())
        throw ConfigError("connectivity: forecast/mask length mismatch");

    ConnectivityReport report;
    report.threshold = kappa + (conn_floor - kappa) / 2.0;
    report.predicted_connected.reserve(pred_orig.size());
    report.actual_connected.reserve(pred_orig.size());
    for (std::size_t i = 0; i < pred_orig.size(); ++i) {
        const bool predicted = pred_orig[i] > report.threshold;
        const bool actual = actual_disconnected[i] == 0.0;
        report.predicted_connected.push_back(predicted ? 1 : 0);
        report.actual_connected.push_back(actual ? 1 : 0);
        if (predicted && actual)
            ++report.true_positive;
        else if (!predicted && !actual)
            ++report.true_negative;
        else if (predicted && !actual)
            ++report.false_positive;
        else
            ++report.false_negative;
    }
    const long total = static_cast<long>(pred_orig.size());
    report.accuracy =
        total == 0 ? 0.0
                   : static_cast<double>(report.true_positive + report.true_negative) /
                         static_cast<double>(total);
    return report;
}

namespace {

JsonNode phase_to_json(const PhaseEval& phase) {
    JsonNode node = JsonNode::object();
    node.set("rmse", JsonNode(phase.rmse));
    JsonNode per_feature = JsonNode::array();
    for (double v : phase.rmse_per_feature) per_feature.push_back(JsonNode(v));
    node.set("rmse_per_feature", std::move(per_feature));
    node.set("n_samples", JsonNode(static_cast<double>(phase.n_samples)));
    return node;
}

} // namespace

std::string EvalReport::to_json() const {
    JsonNode node = JsonNode::object();
    node.set("train", phase_to_json(train));
    node.set("test", phase_to_json(test));
    node.set("persistence_rmse_test", JsonNode(persistence_rmse_test));
    return write_json(node, {.indent = 2}) + "\n";
}

std::string ConnectivityReport::to_json() const {
    JsonNode node = JsonNode::object();
    node.set("threshold", JsonNode(threshold));
    node.set("accuracy", JsonNode(accuracy));
    node.set("true_positive", JsonNode(static_cast<double>(true_positive)));
    node.set("true_negative", JsonNode(static_cast<double>(true_negative)));
    node.set("false_positive", JsonNode(static_cast<double>(false_positive)));
    node.set("false_negative", JsonNode(static_cast<double>(false_negative)));
    JsonNode pred = JsonNode::array();
    for (int v : predicted_connected) pred.push_back(JsonNode(static_cast<double>(v)));
    node.set("predicted_connected", std::move(pred));
    JsonNode actual = JsonNode::array();
    for (int v : actual_connected) actual.push_back(JsonNode(static_cast<double>(v)));
    node.set("actual_connected", std::move(actual));
    return write_json(node, {.indent = 2}) + "\n";
}

// ---------------------------------------------------------------------------
// Forecast plot

namespace {

struct PlotScale {
    double x0, y0, width, height;
    double t_max, v_min, v_max;

    double x(double t) const { return x0 + width * (t_max > 0 ? t / t_max : 0.0); }
    double y(double v) const {
        const double span = v_max - v_min;
        const double frac = span > 0 ? (v - v_min) / span : 0.5;
        return y0 + height * (1.0 - frac);
    }
};

std::string polyline_points(const std::vector<double>& series, const PlotScale& scale) {
    std::string pts;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (i) pts.push_back(' ');
        pts += format_double(scale.x(static_cast<double>(i)));
        pts.push_back(',');
        pts += format_double(scale.y(series[i]));
    }
    return pts;
}

} // namespace

void emit_forecast_plot(const std::vector<double>& actual, const std::vector<double>& predicted,
                        const std::vector<double>& disconnected, const std::string& svg_path,
                        const std::string& csv_path) {
    if (actual.size() != predicted.size())
        throw ConfigError("forecast plot: series length mismatch");
    if (!disconnected.empty() && disconnected.size() != actual.size())
        throw ConfigError("forecast plot: mask length mismatch");
    if (actual.empty()) throw ConfigError("forecast plot: empty series");

    double v_min = actual[0], v_max = actual[0];
    for (double v : actual) { v_min = std::min(v_min, v); v_max = std::max(v_max, v); }
    for (double v : predicted) { v_min = std::min(v_min, v); v_max = std::max(v_max, v); }
    const double pad = (v_max - v_min) * 0.05;
    PlotScale scale{60.0, 20.0, 820.0, 250.0, static_cast<double>(actual.size() - 1),
                    v_min - pad, v_max + pad};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"920\" height=\"320\" "
           "viewBox=\"0 0 920 320\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"920\" height=\"320\" fill=\"white\"/>\n";

    // Shade disconnection intervals.
    for (std::size_t i = 0; i < disconnected.size();) {
        if (disconnected[i] == 0.0) { ++i; continue; }
        std::size_t j = i;
        while (j < disconnected.size() && disconnected[j] != 0.0) ++j;
        const double x0 = scale.x(static_cast<double>(i));
        const double x1 = scale.x(static_cast<double>(j - 1));
        svg += "<rect x=\"" + format_double(x0) + "\" y=\"" + format_double(scale.y0) +
               "\" width=\"" + format_double(std::max(1.0, x1 - x0)) + "\" height=\"" +
               format_double(scale.height) + "\" fill=\"#fdd\" />\n";
        i = j;
    }

    // Axes with range labels.
    svg += "<line x1=\"60\" y1=\"20\" x2=\"60\" y2=\"270\" stroke=\"black\"/>\n";
    svg += "<line x1=\"60\" y1=\"270\" x2=\"880\" y2=\"270\" stroke=\"black\"/>\n";
    svg += "<text x=\"8\" y=\"25\" font-size=\"12\">" + format_double(scale.v_max) + "</text>\n";
    svg += "<text x=\"8\" y=\"270\" font-size=\"12\">" + format_double(scale.v_min) + "</text>\n";
    svg += "<text x=\"60\" y=\"290\" font-size=\"12\">0</text>\n";
    svg += "<text x=\"850\" y=\"290\" font-size=\"12\">" + format_double(scale.t_max) + "</text>\n";
    svg += "<text x=\"400\" y=\"308\" font-size=\"12\">time step (s)</text>\n";

    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"" +
           polyline_points(actual, scale) + "\"/>\n";
    svg += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\" points=\"" +
           polyline_points(predicted, scale) + "\"/>\n";
    svg += "<text x=\"700\" y=\"35\" font-size=\"12\" fill=\"#1f77b4\">actual</text>\n";
    svg += "<text x=\"760\" y=\"35\" font-size=\"12\" fill=\"#d62728\">predicted</text>\n";
    svg += "</svg>\n";
    write_file(svg_path, svg);

    std::string csv = "time,actual,predicted\n";
    for (std::size_t i = 0; i < actual.size(); ++i) {
        csv += std::to_string(i);
        csv.push_back(',');
        csv += format_double(actual[i]);
        csv.push_back(',');
        csv += format_double(predicted[i]);
        csv.push_back('\n');
    }
    write_file(csv_path, csv);
}

} // namespace kpifc
