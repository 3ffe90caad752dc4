#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "kpifc/model.hpp"
#include "kpifc/preprocess.hpp"
#include "kpifc/windowing.hpp"

namespace kpifc {

// RMSE over all flattened elements, in whatever units the inputs carry.
double rmse(const std::vector<Eigen::MatrixXd>& pred, const std::vector<Eigen::MatrixXd>& label);

struct PhaseEval {
    double rmse = 0.0;                    // original units
    std::vector<double> rmse_per_feature; // one entry per label feature
    long n_samples = 0;                   // flattened batch x time x feature count
};

struct EvalReport {
    PhaseEval train;
    PhaseEval test;
    double persistence_rmse_test = 0.0; // last-observed-value baseline, original units

    std::string to_json() const;
};

// Scaler restricted to the selected label feature columns.
ScalerParams select_scaler_columns(const ScalerParams& scaler, const FeatureSelector& sel);

// Model predictions and window labels mapped back to original units through
// the label features' scaler columns. pred[i] and label[i] are w_lbl x C.
struct OrigUnitSeries {
    std::vector<Eigen::MatrixXd> pred;
    std::vector<Eigen::MatrixXd> label;
};

OrigUnitSeries predict_original_units(const ModelState& state, const WindowSet& windows,
                                      const ScalerParams& scaler, const FeatureSelector& sel,
                                      Eigen::Index w_lbl);

// Predict, inverse-scale predictions and labels through the label features'
// scaler columns, and compute RMSE in original units.
PhaseEval evaluate(const ModelState& state, const WindowSet& windows, const ScalerParams& scaler,
                   const FeatureSelector& sel, Eigen::Index w_lbl);

// Baseline forecaster: every label row is the last observed input row
// (restricted to the label features). Output layout matches predict().
std::vector<Eigen::MatrixXd> persistence_predictions(const WindowSet& windows,
                                                     const FeatureSelector& sel,
                                                     Eigen::Index w_lbl);

struct ConnectivityReport {
    double threshold = 0.0; // original units
    double accuracy = 0.0;
    long true_positive = 0;  // predicted connected, actually connected
    long true_negative = 0;  // predicted disconnected, actually disconnected
    long false_positive = 0;
    long false_negative = 0;
    std::vector<int> predicted_connected; // per step, 1 = connected
    std::vector<int> actual_connected;

    std::string to_json() const;
};

// Midpoint-threshold classification: connected iff forecast > kappa +
// (conn_floor - kappa) / 2. `actual_disconnected` is the ground-truth mask
// carried from the imputation stage (1 = disconnected), aligned with `pred`.
ConnectivityReport classify_connectivity(const std::vector<double>& pred_orig,
                                         const std::vector<double>& actual_disconnected,
                                         double kappa, double conn_floor);

// SVG overlay of actual vs predicted plus a paired CSV (time, actual,
// predicted). Steps where `disconnected` is nonzero are shaded.
void emit_forecast_plot(const std::vector<double>& actual, const std::vector<double>& predicted,
                        const std::vector<double>& disconnected, const std::string& svg_path,
                        const std::string& csv_path);

} // namespace kpifc
