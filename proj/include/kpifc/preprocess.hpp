#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "kpifc/extract.hpp"

namespace kpifc {

// Dense N x d series, temporal row order, no Missing entries.
using TimeSeriesMatrix = Eigen::MatrixXd;

// Constant-fill imputation. `kappa` applies to every feature unless a
// per-feature override is present (override vector, when non-empty, must
// have one entry per feature).
struct ImputationConfig {
    double kappa = 0.0;
    std::vector<double> per_feature; // optional, size d when used
};

struct ImputeResult {
    TimeSeriesMatrix series;
    // 1.0 where the entry was Missing before imputation (= disconnected).
    Eigen::MatrixXd disconnected;
    std::vector<long> replaced_per_feature;
};

ImputeResult impute(const KpiTable& table, const ImputationConfig& cfg);

struct SplitRatios {
    double train = 0.7;
    double val = 0.2;
    double test = 0.1;
};

struct SplitResult {
    TimeSeriesMatrix train;
    TimeSeriesMatrix val;
    TimeSeriesMatrix test;
};

// Contiguous, order-preserving partition: N_tr = floor(r_tr * N),
// N_val = floor(r_val * N), N_te = remainder. Any empty part is an error.
SplitResult split(const TimeSeriesMatrix& series, const SplitRatios& ratios);

// Per-feature min-max bounds, fitted on the training split only. Features
// with x_max == x_min are degenerate: they scale to 0 and invert to x_min.
struct ScalerParams {
    Eigen::VectorXd x_min;
    Eigen::VectorXd x_max;

    Eigen::Index features() const { return x_min.size(); }
    bool degenerate(Eigen::Index j) const { return x_max[j] == x_min[j]; }

    std::string to_json() const;
    static ScalerParams from_json(const std::string& text);
    void save(const std::string& path) const;
    static ScalerParams load(const std::string& path);
};

ScalerParams fit_scaler(const TimeSeriesMatrix& train);

TimeSeriesMatrix transform(const ScalerParams& params, const TimeSeriesMatrix& m);
TimeSeriesMatrix inverse_transform(const ScalerParams& params, const TimeSeriesMatrix& m);

// Matrix <-> CSV helpers for split artifacts (no Missing cells involved).
std::string matrix_to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::string& text);
void save_matrix_csv(const Eigen::MatrixXd& m, const std::string& path);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

} // namespace kpifc
