#include "kpifc/preprocess.hpp"

#include <cmath>

#include "kpifc/json.hpp"

namespace kpifc {

ImputeResult impute(const KpiTable& table, const ImputationConfig& cfg) {
    const auto rows = static_cast<Eigen::Index>(table.rows());
    const auto cols = static_cast<Eigen::Index>(table.cols());
    if (rows == 0) throw DataError("impute: table has no rows");
    if (!std::isfinite(cfg.kappa)) throw ConfigError("impute: kappa must be finite");
    if (!cfg.per_feature.empty()) {
        if (static_cast<Eigen::Index>(cfg.per_feature.size()) != cols)
            throw ConfigError("impute: per-feature kappa size does not match feature count");
        for (double k : cfg.per_feature)
            if (!std::isfinite(k)) throw ConfigError("impute: kappa must be finite");
    }

    ImputeResult result;
    result.series.resize(rows, cols);
    result.disconnected = Eigen::MatrixXd::Zero(rows, cols);
    result.replaced_per_feature.assign(static_cast<std::size_t>(cols), 0);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = table.data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (is_missing(v)) {
                const double k =
                    cfg.per_feature.empty() ? cfg.kappa : cfg.per_feature[static_cast<std::size_t>(j)];
                result.series(i, j) = k;
                result.disconnected(i, j) = 1.0;
                ++result.replaced_per_feature[static_cast<std::size_t>(j)];
            } else {
                result.series(i, j) = v;
            }
        }
    }
    return result;
}

SplitResult split(const TimeSeriesMatrix& series, const SplitRatios& ratios) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0)
        throw ConfigError("split: ratios must be non-negative");
    if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-12)
        throw ConfigError("split: ratios must sum to 1");

    const Eigen::Index n = series.rows();
    const auto n_train = static_cast<Eigen::Index>(std::floor(ratios.train * static_cast<double>(n)));
    const auto n_val = static_cast<Eigen::Index>(std::floor(ratios.val * static_cast<double>(n)));
    const Eigen::Index n_test = n - n_train - n_val;
    if (n_train < 1 || n_val < 1 || n_test < 1)
        throw DataError("split: empty partition (N=" + std::to_string(n) + " gives " +
                        std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                        std::to_string(n_test) + ")");

    SplitResult result;
    result.train = series.topRows(n_train);
    result.val = series.middleRows(n_train, n_val);
    result.test = series.bottomRows(n_test);
    return result;
}

ScalerParams fit_scaler(const TimeSeriesMatrix& train) {
    if (train.rows() == 0 || train.cols() == 0) throw DataError("fit_scaler: empty training split");
    if (!train.allFinite()) throw DataError("fit_scaler: non-finite values in training split");
    ScalerParams params;
    params.x_min = train.colwise().minCoeff();
    params.x_max = train.colwise().maxCoeff();
    return params;
}

TimeSeriesMatrix transform(const ScalerParams& params, const TimeSeriesMatrix& m) {
    if (m.cols() != params.features())
        throw ConfigError("transform: expected " + std::to_string(params.features()) +
                          " features, got " + std::to_string(m.cols()));
    TimeSeriesMatrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (params.degenerate(j)) {
            out.col(j).setZero();
        } else {
            out.col(j) = (m.col(j).array() - params.x_min[j]) / (params.x_max[j] - params.x_min[j]);
        }
    }
    return out;
}

TimeSeriesMatrix inverse_transform(const ScalerParams& params, const TimeSeriesMatrix& m) {
    if (m.cols() != params.features())
        throw ConfigError("inverse_transform: expected " + std::to_string(params.features()) +
                          " features, got " + std::to_string(m.cols()));
    TimeSeriesMatrix out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (params.degenerate(j)) {
            out.col(j).setConstant(params.x_min[j]);
        } else {
            out.col(j) = m.col(j).array() * (params.x_max[j] - params.x_min[j]) + params.x_min[j];
        }
    }
    return out;
}

std::string ScalerParams::to_json() const {
    JsonNode min_arr = JsonNode::array();
    JsonNode max_arr = JsonNode::array();
    for (Eigen::Index j = 0; j < features(); ++j) {
        min_arr.push_back(JsonNode(x_min[j]));
        max_arr.push_back(JsonNode(x_max[j]));
    }
    JsonNode doc = JsonNode::object();
    doc.set("x_min", std::move(min_arr));
    doc.set("x_max", std::move(max_arr));
    return write_json(doc, {.indent = 2}) + "\n";
}

ScalerParams ScalerParams::from_json(const std::string& text) {
    const JsonNode doc = parse_json(text);
    const JsonNode* min_arr = doc.find("x_min");
    const JsonNode* max_arr = doc.find("x_max");
    if (!min_arr || !max_arr || !min_arr->is_array() || !max_arr->is_array() ||
        min_arr->items().size() != max_arr->items().size())
        throw DataError("scaler sidecar: expected x_min/x_max arrays of equal length");
    const auto d = static_cast<Eigen::Index>(min_arr->items().size());
    ScalerParams params;
    params.x_min.resize(d);
    params.x_max.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        params.x_min[j] = min_arr->items()[static_cast<std::size_t>(j)].as_number();
        params.x_max[j] = max_arr->items()[static_cast<std::size_t>(j)].as_number();
    }
    return params;
}

void ScalerParams::save(const std::string& path) const { write_file(path, to_json()); }

ScalerParams ScalerParams::load(const std::string& path) { return from_json(read_file(path)); }

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out.push_back(',');
            out += format_double(m(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
    const KpiTable table = parse_csv(text);
    const auto rows = static_cast<Eigen::Index>(table.rows());
    const auto cols = static_cast<Eigen::Index>(table.cols());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double v = table.data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (is_missing(v)) throw DataError("matrix CSV contains empty cells");
            m(i, j) = v;
        }
    return m;
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
    write_file(path, matrix_to_csv(m));
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
    return matrix_from_csv(read_file(path));
}

} // namespace kpifc
