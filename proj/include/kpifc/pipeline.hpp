#pragma once

#include <limits>
#include <string>
#include <vector>

#include "kpifc/eval.hpp"
#include "kpifc/model.hpp"
#include "kpifc/preprocess.hpp"
#include "kpifc/synth.hpp"
#include "kpifc/windowing.hpp"

namespace kpifc {

// Stage artifact names within the output directory.
namespace artifact {
inline constexpr const char* kTrace = "trace.json";
inline constexpr const char* kRegimes = "regimes.csv";
inline constexpr const char* kKpiCsv = "kpi.csv";
inline constexpr const char* kScaledTrain = "scaled_train.csv";
inline constexpr const char* kScaledVal = "scaled_val.csv";
inline constexpr const char* kScaledTest = "scaled_test.csv";
inline constexpr const char* kScaler = "scaler.json";
inline constexpr const char* kMask = "mask.csv";
inline constexpr const char* kPrepareMeta = "prepare.json";
inline constexpr const char* kCheckpoint = "model.ckpt";
inline constexpr const char* kHistory = "history.csv";
inline constexpr const char* kEvalReport = "eval_report.json";
inline constexpr const char* kConnectivityReport = "connectivity_report.json";
inline constexpr const char* kForecastSvg = "forecast.svg";
inline constexpr const char* kForecastCsv = "forecast.csv";
} // namespace artifact

// Everything a full run needs, loadable from one JSON document; CLI flags
// override individual fields. One seed governs the whole run.
struct PipelineConfig {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string input; // KPI JSON log; defaults to <out_dir>/trace.json

    std::string key_records = "ues";                  // k1
    std::vector<std::string> key_features = {"sinr"}; // k2 list, column order

    double kappa = 0.0;
    SplitRatios ratios;
    WindowSpec window{.w_in = 12, .w_lbl = 1, .shift = 1};
    std::vector<Eigen::Index> label_features = {0};

    Eigen::Index units = 32;
    Eigen::Index fc_base = 16;
    double learning_rate = 1e-3;
    int epochs = 50;
    Eigen::Index batch_size = 32;

    TraceConfig synth;
    // Lowest KPI level still considered connected; NaN = use the synth NLOS
    // mean. The classification threshold is the midpoint between kappa and
    // this floor.
    double conn_floor = std::numeric_limits<double>::quiet_NaN();

    std::string input_path() const;
    std::string path(const char* name) const;
    double connectivity_floor() const;
    FeatureSelector selector() const;

    static PipelineConfig from_json(const JsonNode& doc);
    static PipelineConfig load(const std::string& path);
    JsonNode to_json() const; // canonical form, used for the manifest hash
    void validate() const;
};

// Pipeline stages; each reads its inputs from and writes its artifacts to
// config.out_dir, together with a manifest that pins config hash and seed.
void cmd_synth(const PipelineConfig& config);
void cmd_extract(const PipelineConfig& config);
void cmd_prepare(const PipelineConfig& config);
void cmd_train(const PipelineConfig& config);
void cmd_eval(const PipelineConfig& config);
void cmd_run(const PipelineConfig& config); // all five in order

} // namespace kpifc
