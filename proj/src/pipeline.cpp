#include "kpifc/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>

#include "kpifc/extract.hpp"
#include "kpifc/rng.hpp"

namespace fs = std::filesystem;

namespace kpifc {

namespace {

double js_num(const JsonNode& obj, const char* key, double fallback) {
    const JsonNode* v = obj.find(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
    return v->as_number();
}

std::string js_str(const JsonNode& obj, const char* key, const std::string& fallback) {
    const JsonNode* v = obj.find(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(std::string("config: '") + key + "' must be a string");
    return v->as_string();
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

} // namespace

std::string PipelineConfig::input_path() const {
    return input.empty() ? path(artifact::kTrace) : input;
}

std::string PipelineConfig::path(const char* name) const {
    return (fs::path(out_dir) / name).string();
}

double PipelineConfig::connectivity_floor() const {
    return std::isnan(conn_floor) ? synth.nlos_mean_sinr : conn_floor;
}

FeatureSelector PipelineConfig::selector() const {
    FeatureSelector sel;
    sel.indices = label_features;
    return sel;
}

PipelineConfig PipelineConfig::from_json(const JsonNode& doc) {
    if (!doc.is_object()) throw ConfigError("config: top-level JSON object expected");
    PipelineConfig config;
    config.seed = static_cast<std::uint64_t>(js_num(doc, "seed", 0.0));
    config.out_dir = js_str(doc, "out_dir", config.out_dir);
    config.input = js_str(doc, "input", "");
    config.kappa = js_num(doc, "kappa", config.kappa);

    if (const JsonNode* keys = doc.find("keys")) {
        config.key_records = js_str(*keys, "records", config.key_records);
        if (const JsonNode* feats = keys->find("features")) {
            if (!feats->is_array()) throw ConfigError("config: keys.features must be an array");
            config.key_features.clear();
            for (const auto& f : feats->items()) config.key_features.push_back(f.as_string());
        }
    }
    if (const JsonNode* split = doc.find("split")) {
        config.ratios.train = js_num(*split, "train", config.ratios.train);
        config.ratios.val = js_num(*split, "val", config.ratios.val);
        config.ratios.test = js_num(*split, "test", config.ratios.test);
    }
    if (const JsonNode* window = doc.find("window")) {
        config.window.w_in = static_cast<Eigen::Index>(js_num(*window, "w_in", 12));
        config.window.w_lbl = static_cast<Eigen::Index>(js_num(*window, "w_lbl", 1));
        config.window.shift = static_cast<Eigen::Index>(js_num(*window, "shift", 1));
    }
    if (const JsonNode* lf = doc.find("label_features")) {
        if (!lf->is_array()) throw ConfigError("config: label_features must be an array");
        config.label_features.clear();
        for (const auto& v : lf->items())
            config.label_features.push_back(static_cast<Eigen::Index>(v.as_number()));
    }
    if (const JsonNode* model = doc.find("model")) {
        config.units = static_cast<Eigen::Index>(js_num(*model, "units", 32));
        config.fc_base = static_cast<Eigen::Index>(js_num(*model, "fc_base", 16));
        config.learning_rate = js_num(*model, "learning_rate", config.learning_rate);
        config.epochs = static_cast<int>(js_num(*model, "epochs", 50));
        config.batch_size = static_cast<Eigen::Index>(js_num(*model, "batch_size", 32));
    }
    if (const JsonNode* synth = doc.find("synth")) {
        config.synth.duration = static_cast<long>(js_num(*synth, "duration", 3600));
        config.synth.los_mean_sinr = js_num(*synth, "los_mean_sinr", config.synth.los_mean_sinr);
        config.synth.nlos_mean_sinr = js_num(*synth, "nlos_mean_sinr", config.synth.nlos_mean_sinr);
        config.synth.ar_coeff = js_num(*synth, "ar_coeff", config.synth.ar_coeff);
        config.synth.noise_sigma = js_num(*synth, "noise_sigma", config.synth.noise_sigma);
        config.synth.los_dwell_mean = js_num(*synth, "los_dwell_mean", config.synth.los_dwell_mean);
        config.synth.nlos_dwell_mean = js_num(*synth, "nlos_dwell_mean", config.synth.nlos_dwell_mean);
        config.synth.disc_dwell_mean = js_num(*synth, "disc_dwell_mean", config.synth.disc_dwell_mean);
        if (const JsonNode* feats = synth->find("features")) {
            if (!feats->is_array()) throw ConfigError("config: synth.features must be an array");
            config.synth.derived.clear();
            bool has_sinr = false;
            for (const auto& f : feats->items()) {
                if (f.as_string() == "sinr")
                    has_sinr = true;
                else
                    config.synth.derived.push_back(default_derived_feature(f.as_string()));
            }
            if (!has_sinr) throw ConfigError("config: synth.features must include 'sinr'");
        }
    }
    if (const JsonNode* conn = doc.find("connectivity"))
        config.conn_floor = js_num(*conn, "conn_floor", config.conn_floor);
    config.validate();
    return config;
}

PipelineConfig PipelineConfig::load(const std::string& config_path) {
    return from_json(load_document(config_path));
}

JsonNode PipelineConfig::to_json() const {
    JsonNode doc = JsonNode::object();
    doc.set("seed", JsonNode(static_cast<double>(seed)));
    doc.set("out_dir", JsonNode(out_dir));
    doc.set("input", JsonNode(input_path()));
    JsonNode keys = JsonNode::object();
    keys.set("records", JsonNode(key_records));
    JsonNode feats = JsonNode::array();
    for (const auto& f : key_features) feats.push_back(JsonNode(f));
    keys.set("features", std::move(feats));
    doc.set("keys", std::move(keys));
    doc.set("kappa", JsonNode(kappa));
    JsonNode split = JsonNode::object();
    split.set("train", JsonNode(ratios.train));
    split.set("val", JsonNode(ratios.val));
    split.set("test", JsonNode(ratios.test));
    doc.set("split", std::move(split));
    JsonNode window = JsonNode::object();
    window.set("w_in", JsonNode(static_cast<double>(this->window.w_in)));
    window.set("w_lbl", JsonNode(static_cast<double>(this->window.w_lbl)));
    window.set("shift", JsonNode(static_cast<double>(this->window.shift)));
    doc.set("window", std::move(window));
    JsonNode labels = JsonNode::array();
    for (Eigen::Index idx : label_features) labels.push_back(JsonNode(static_cast<double>(idx)));
    doc.set("label_features", std::move(labels));
    JsonNode model = JsonNode::object();
    model.set("units", JsonNode(static_cast<double>(units)));
    model.set("fc_base", JsonNode(static_cast<double>(fc_base)));
    model.set("learning_rate", JsonNode(learning_rate));
    model.set("epochs", JsonNode(static_cast<double>(epochs)));
    model.set("batch_size", JsonNode(static_cast<double>(batch_size)));
    doc.set("model", std::move(model));
    JsonNode synth_node = JsonNode::object();
    synth_node.set("duration", JsonNode(static_cast<double>(synth.duration)));
    synth_node.set("los_mean_sinr", JsonNode(synth.los_mean_sinr));
    synth_node.set("nlos_mean_sinr", JsonNode(synth.nlos_mean_sinr));
    synth_node.set("ar_coeff", JsonNode(synth.ar_coeff));
    synth_node.set("noise_sigma", JsonNode(synth.noise_sigma));
    synth_node.set("los_dwell_mean", JsonNode(synth.los_dwell_mean));
    synth_node.set("nlos_dwell_mean", JsonNode(synth.nlos_dwell_mean));
    synth_node.set("disc_dwell_mean", JsonNode(synth.disc_dwell_mean));
    JsonNode synth_feats = JsonNode::array();
    synth_feats.push_back(JsonNode("sinr"));
    for (const auto& f : synth.derived) synth_feats.push_back(JsonNode(f.name));
    synth_node.set("features", std::move(synth_feats));
    doc.set("synth", std::move(synth_node));
    JsonNode conn = JsonNode::object();
    conn.set("conn_floor", JsonNode(connectivity_floor()));
    doc.set("connectivity", std::move(conn));
    return doc;
}

void PipelineConfig::validate() const {
    window.validate();
    if (key_records.empty()) throw ConfigError("config: keys.records must not be empty");
    if (key_features.empty()) throw ConfigError("config: keys.features must not be empty");
    if (label_features.empty()) throw ConfigError("config: label_features must not be empty");
    if (epochs < 0) throw ConfigError("config: epochs must be >= 0");
    if (units < 1 || fc_base < 1) throw ConfigError("config: model widths must be >= 1");
    if (batch_size < 1) throw ConfigError("config: batch size must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("config: learning rate must be > 0");
    if (!std::isfinite(kappa)) throw ConfigError("config: kappa must be finite");
    synth.validate();
}

// ---------------------------------------------------------------------------
// Manifests

namespace {

void write_manifest(const PipelineConfig& config, const std::string& stage,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, JsonNode details = JsonNode()) {
    const JsonNode config_json = config.to_json();
    const std::string canonical = write_json(config_json);
    JsonNode manifest = JsonNode::object();
    manifest.set("stage", JsonNode(stage));
    manifest.set("seed", JsonNode(static_cast<double>(config.seed)));
    manifest.set("config_hash", JsonNode(hex64(fnv1a64(canonical))));
    manifest.set("config", config_json);
    JsonNode in_arr = JsonNode::array();
    for (const auto& p : inputs) in_arr.push_back(JsonNode(p));
    manifest.set("inputs", std::move(in_arr));
    JsonNode out_arr = JsonNode::array();
    for (const auto& p : outputs) out_arr.push_back(JsonNode(p));
    manifest.set("outputs", std::move(out_arr));
    if (!details.is_null()) manifest.set("details", std::move(details));
    write_file(config.path(("manifest_" + stage + ".json").c_str()),
               write_json(manifest, {.indent = 2}) + "\n");
}

void ensure_out_dir(const PipelineConfig& config) {
    fs::create_directories(config.out_dir);
}

struct PrepareMeta {
    double kappa = 0.0;
    long n = 0, n_train = 0, n_val = 0, n_test = 0;
    std::vector<std::string> columns;
    std::vector<long> disconnected_per_feature;

    JsonNode to_json() const {
        JsonNode doc = JsonNode::object();
        doc.set("kappa", JsonNode(kappa));
        doc.set("n", JsonNode(static_cast<double>(n)));
        doc.set("n_train", JsonNode(static_cast<double>(n_train)));
        doc.set("n_val", JsonNode(static_cast<double>(n_val)));
        doc.set("n_test", JsonNode(static_cast<double>(n_test)));
        JsonNode cols = JsonNode::array();
        for (const auto& c : columns) cols.push_back(JsonNode(c));
        doc.set("columns", std::move(cols));
        JsonNode disc = JsonNode::array();
        for (long v : disconnected_per_feature) disc.push_back(JsonNode(static_cast<double>(v)));
        doc.set("disconnected_per_feature", std::move(disc));
        return doc;
    }

    static PrepareMeta load(const std::string& path) {
        const JsonNode doc = load_document(path);
        PrepareMeta meta;
        meta.kappa = js_num(doc, "kappa", 0.0);
        meta.n = static_cast<long>(js_num(doc, "n", 0));
        meta.n_train = static_cast<long>(js_num(doc, "n_train", 0));
        meta.n_val = static_cast<long>(js_num(doc, "n_val", 0));
        meta.n_test = static_cast<long>(js_num(doc, "n_test", 0));
        if (const JsonNode* cols = doc.find("columns"))
            for (const auto& c : cols->items()) meta.columns.push_back(c.as_string());
        if (const JsonNode* disc = doc.find("disconnected_per_feature"))
            for (const auto& v : disc->items())
                meta.disconnected_per_feature.push_back(static_cast<long>(v.as_number()));
        return meta;
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Stages

void cmd_synth(const PipelineConfig& config) {
    ensure_out_dir(config);
    TraceConfig trace_cfg = config.synth;
    trace_cfg.seed = derive_seed(config.seed, "synth");
    const Trace trace = generate_trace(trace_cfg);
    write_trace(trace.document, config.path(artifact::kTrace));
    write_regime_csv(trace, config.path(artifact::kRegimes));

    JsonNode details = JsonNode::object();
    details.set("duration", JsonNode(static_cast<double>(trace_cfg.duration)));
    long disconnected = 0;
    for (Regime regime : trace.regimes)
        if (regime == Regime::Disconnected) ++disconnected;
    details.set("disconnected_seconds", JsonNode(static_cast<double>(disconnected)));
    write_manifest(config, "synth", {},
                   {config.path(artifact::kTrace), config.path(artifact::kRegimes)},
                   std::move(details));
}

void cmd_extract(const PipelineConfig& config) {
    ensure_out_dir(config);
    const JsonNode doc = load_document(config.input_path());

    KpiTable combined;
    std::size_t coercion_failures = 0;
    std::size_t record_count = 0;
    for (const auto& key : config.key_features) {
        const RaggedSeries series = extract_two_layer(doc, config.key_records, key);
        if (series.rows.empty())
            throw DataError("extract: key '" + config.key_records + "' not found in " +
                            config.input_path());
        coercion_failures += series.coercion_failures;
        const KpiTable table = pad_stack(series);
        if (table.cols() == 0)
            throw DataError("extract: key '" + key + "' produced no values in " +
                            config.input_path());
        if (combined.data.empty()) {
            record_count = table.rows();
            combined.data.assign(record_count, {});
        } else if (table.rows() != record_count) {
            throw DataError("extract: key '" + key + "' yields " + std::to_string(table.rows()) +
                            " records, expected " + std::to_string(record_count));
        }
        for (std::size_t i = 0; i < record_count; ++i)
            combined.data[i].insert(combined.data[i].end(), table.data[i].begin(),
                                    table.data[i].end());
        if (table.cols() == 1) {
            combined.column_names.push_back(key);
        } else {
            for (std::size_t j = 1; j <= table.cols(); ++j)
                combined.column_names.push_back(key + "_" + std::to_string(j));
        }
    }
    export_csv(combined, config.path(artifact::kKpiCsv));

    JsonNode details = JsonNode::object();
    details.set("records", JsonNode(static_cast<double>(record_count)));
    details.set("features", JsonNode(static_cast<double>(combined.cols())));
    details.set("coercion_failures", JsonNode(static_cast<double>(coercion_failures)));
    write_manifest(config, "extract", {config.input_path()}, {config.path(artifact::kKpiCsv)},
                   std::move(details));
}

void cmd_prepare(const PipelineConfig& config) {
    ensure_out_dir(config);
    const KpiTable table = import_csv(config.path(artifact::kKpiCsv));
    const ImputeResult imputed = impute(table, ImputationConfig{.kappa = config.kappa});
    const SplitResult splits = split(imputed.series, config.ratios);
    const ScalerParams scaler = fit_scaler(splits.train);

    save_matrix_csv(transform(scaler, splits.train), config.path(artifact::kScaledTrain));
    save_matrix_csv(transform(scaler, splits.val), config.path(artifact::kScaledVal));
    save_matrix_csv(transform(scaler, splits.test), config.path(artifact::kScaledTest));
    save_matrix_csv(imputed.disconnected, config.path(artifact::kMask));
    scaler.save(config.path(artifact::kScaler));

    PrepareMeta meta;
    meta.kappa = config.kappa;
    meta.n = imputed.series.rows();
    meta.n_train = splits.train.rows();
    meta.n_val = splits.val.rows();
    meta.n_test = splits.test.rows();
    meta.columns = table.column_names;
    meta.disconnected_per_feature = imputed.replaced_per_feature;
    write_file(config.path(artifact::kPrepareMeta), write_json(meta.to_json(), {.indent = 2}) + "\n");

    write_manifest(config, "prepare", {config.path(artifact::kKpiCsv)},
                   {config.path(artifact::kScaledTrain), config.path(artifact::kScaledVal),
                    config.path(artifact::kScaledTest), config.path(artifact::kScaler),
                    config.path(artifact::kMask), config.path(artifact::kPrepareMeta)},
                   meta.to_json());
}

void cmd_train(const PipelineConfig& config) {
    ensure_out_dir(config);
    const Eigen::MatrixXd scaled_train = load_matrix_csv(config.path(artifact::kScaledTrain));
    const Eigen::MatrixXd scaled_val = load_matrix_csv(config.path(artifact::kScaledVal));
    const FeatureSelector sel = config.selector();
    const WindowSet train_ws = make_windows(scaled_train, config.window, sel);
    const WindowSet val_ws = make_windows(scaled_val, config.window, sel);

    ModelConfig model_cfg;
    model_cfg.units = config.units;
    model_cfg.fc_base = config.fc_base;
    model_cfg.out_features = static_cast<Eigen::Index>(sel.indices.size());
    model_cfg.time_steps = config.window.w_in;
    model_cfg.in_features = scaled_train.cols();
    model_cfg.learning_rate = config.learning_rate;
    model_cfg.epochs = config.epochs;
    model_cfg.batch_size = config.batch_size;
    model_cfg.seed = config.seed;

    ModelState state = init_model(model_cfg);
    state.scaler = ScalerParams::load(config.path(artifact::kScaler));
    state.scaler_sidecar = artifact::kScaler;

    const TrainHistory history = train(state, train_ws, val_ws,
                                       [](int epoch, double train_loss, double val_loss) {
                                           JsonNode line = JsonNode::object();
                                           line.set("epoch", JsonNode(static_cast<double>(epoch)));
                                           line.set("train_loss", JsonNode(train_loss));
                                           line.set("val_loss", JsonNode(val_loss));
                                           std::cout << write_json(line) << std::endl;
                                       });
    save_checkpoint(state, config.path(artifact::kCheckpoint));
    history.save(config.path(artifact::kHistory));

    write_manifest(config, "train",
                   {config.path(artifact::kScaledTrain), config.path(artifact::kScaledVal),
                    config.path(artifact::kScaler)},
                   {config.path(artifact::kCheckpoint), config.path(artifact::kHistory)});
}

void cmd_eval(const PipelineConfig& config) {
    ensure_out_dir(config);
    const ModelState state = load_checkpoint(config.path(artifact::kCheckpoint));
    const Eigen::MatrixXd scaled_train = load_matrix_csv(config.path(artifact::kScaledTrain));
    const Eigen::MatrixXd scaled_test = load_matrix_csv(config.path(artifact::kScaledTest));
    const Eigen::MatrixXd mask = load_matrix_csv(config.path(artifact::kMask));
    const PrepareMeta meta = PrepareMeta::load(config.path(artifact::kPrepareMeta));
    const FeatureSelector sel = config.selector();
    const Eigen::Index w_lbl = config.window.w_lbl;

    const WindowSet train_ws = make_windows(scaled_train, config.window, sel);
    const WindowSet test_ws = make_windows(scaled_test, config.window, sel);

    EvalReport report;
    report.train = evaluate(state, train_ws, state.scaler, sel, w_lbl);
    report.test = evaluate(state, test_ws, state.scaler, sel, w_lbl);

    const ScalerParams label_scaler = select_scaler_columns(state.scaler, sel);
    const std::vector<Eigen::MatrixXd> persist_scaled = persistence_predictions(test_ws, sel, w_lbl);
    std::vector<Eigen::MatrixXd> persist_orig, label_orig;
    persist_orig.reserve(persist_scaled.size());
    label_orig.reserve(persist_scaled.size());
    for (std::size_t i = 0; i < persist_scaled.size(); ++i) {
        persist_orig.push_back(inverse_transform(label_scaler, persist_scaled[i]));
        label_orig.push_back(inverse_transform(label_scaler, test_ws.pairs[i].label));
    }
    report.persistence_rmse_test = rmse(persist_orig, label_orig);
    write_file(config.path(artifact::kEvalReport), report.to_json());

    // Connectivity and the forecast overlay track the first label feature
    // (the primary forecast target).
    const OrigUnitSeries orig = predict_original_units(state, test_ws, state.scaler, sel, w_lbl);
    const Eigen::Index feature = sel.indices.front();
    const long test_offset = meta.n_train + meta.n_val;
    std::vector<double> pred_seq, actual_seq, disconnected_seq;
    for (std::size_t i = 0; i < orig.pred.size(); ++i) {
        for (Eigen::Index tau = 0; tau < w_lbl; ++tau) {
            pred_seq.push_back(orig.pred[i](tau, 0));
            actual_seq.push_back(orig.label[i](tau, 0));
            const long row = test_offset + static_cast<long>(i) + config.window.w_tot() - w_lbl + tau;
            if (row < 0 || row >= mask.rows())
                throw DataError("eval: mask row " + std::to_string(row) + " out of range");
            disconnected_seq.push_back(mask(row, feature));
        }
    }
    const ConnectivityReport connectivity =
        classify_connectivity(pred_seq, disconnected_seq, config.kappa, config.connectivity_floor());
    write_file(config.path(artifact::kConnectivityReport), connectivity.to_json());

    emit_forecast_plot(actual_seq, pred_seq, disconnected_seq, config.path(artifact::kForecastSvg),
                       config.path(artifact::kForecastCsv));

    write_manifest(config, "eval",
                   {config.path(artifact::kCheckpoint), config.path(artifact::kScaledTrain),
                    config.path(artifact::kScaledTest), config.path(artifact::kMask),
                    config.path(artifact::kPrepareMeta)},
                   {config.path(artifact::kEvalReport), config.path(artifact::kConnectivityReport),
                    config.path(artifact::kForecastSvg), config.path(artifact::kForecastCsv)});
}

void cmd_run(const PipelineConfig& config) {
    cmd_synth(config);
    cmd_extract(config);
    cmd_prepare(config);
    cmd_train(config);
    cmd_eval(config);
}

} // namespace kpifc
