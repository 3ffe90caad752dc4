#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "kpifc/pipeline.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::string input;
    std::vector<long> label_features;
    // Optional scalars; CLI11 only writes them when the flag is present.
    long seed = 0;
    double kappa = 0.0;
    long w_in = 0, w_lbl = 0, shift = 0;
    long units = 0, fc_base = 0, epochs = -1, batch_size = 0;
    double eta = 0.0, conn_floor = 0.0, duration = 0.0;
};

kpifc::PipelineConfig resolve_config(const CLI::App& cmd, const CliOverrides& o) {
    kpifc::PipelineConfig config;
    if (!o.config_path.empty()) config = kpifc::PipelineConfig::load(o.config_path);
    if (cmd.count("--seed")) config.seed = static_cast<std::uint64_t>(o.seed);
    if (cmd.count("--out-dir")) config.out_dir = o.out_dir;
    if (cmd.count("--input")) config.input = o.input;
    if (cmd.count("--kappa")) config.kappa = o.kappa;
    if (cmd.count("--w-in")) config.window.w_in = o.w_in;
    if (cmd.count("--w-lbl")) config.window.w_lbl = o.w_lbl;
    if (cmd.count("--shift")) config.window.shift = o.shift;
    if (cmd.count("--label-features")) {
        config.label_features.clear();
        for (long idx : o.label_features) config.label_features.push_back(idx);
    }
    if (cmd.count("--units")) config.units = o.units;
    if (cmd.count("--fc-base")) config.fc_base = o.fc_base;
    if (cmd.count("--eta")) config.learning_rate = o.eta;
    if (cmd.count("--epochs")) config.epochs = static_cast<int>(o.epochs);
    if (cmd.count("--batch-size")) config.batch_size = o.batch_size;
    if (cmd.count("--duration")) config.synth.duration = static_cast<long>(o.duration);
    if (cmd.count("--conn-floor")) config.conn_floor = o.conn_floor;
    config.validate();
    return config;
}

void add_common_options(CLI::App& cmd, CliOverrides& o) {
    cmd.add_option("--config", o.config_path, "pipeline config JSON file");
    cmd.add_option("--out-dir", o.out_dir, "artifact output directory");
    cmd.add_option("--seed", o.seed, "seed governing the whole run");
    cmd.add_option("--input", o.input, "KPI JSON log to ingest");
    cmd.add_option("--kappa", o.kappa, "imputation constant for disconnections");
    cmd.add_option("--w-in", o.w_in, "input window width (steps)");
    cmd.add_option("--w-lbl", o.w_lbl, "label window width (steps)");
    cmd.add_option("--shift", o.shift, "window shift (steps)");
    cmd.add_option("--label-features", o.label_features, "label feature column indices (0-based)")
        ->delimiter(',');
    cmd.add_option("--units", o.units, "LSTM hidden units");
    cmd.add_option("--fc-base", o.fc_base, "FC base width h (layers are 4h, 2h, h)");
    cmd.add_option("--eta", o.eta, "learning rate");
    cmd.add_option("--epochs", o.epochs, "training epochs");
    cmd.add_option("--batch-size", o.batch_size, "mini-batch size");
    cmd.add_option("--duration", o.duration, "synthetic trace length in seconds");
    cmd.add_option("--conn-floor", o.conn_floor, "lowest KPI level considered connected");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"KPI forecasting pipeline: synthesize or ingest per-second JSON KPI logs,\n"
                 "extract features, train a stacked-LSTM forecaster and report RMSE and\n"
                 "connectivity classification."};
    app.require_subcommand(1);

    struct Stage {
        const char* name;
        const char* help;
        void (*fn)(const kpifc::PipelineConfig&);
    };
    const Stage stages[] = {
        {"synth", "generate a synthetic KPI trace in the testbed log schema", kpifc::cmd_synth},
        {"extract", "parse the KPI JSON log and export the padded feature table", kpifc::cmd_extract},
        {"prepare", "impute, split and scale the feature table", kpifc::cmd_prepare},
        {"train", "train the forecaster on the prepared splits", kpifc::cmd_train},
        {"eval", "evaluate RMSE and connectivity on the test split", kpifc::cmd_eval},
        {"run", "run all stages in order", kpifc::cmd_run},
    };

    CliOverrides overrides;
    std::vector<std::pair<CLI::App*, const Stage*>> bound;
    for (const Stage& stage : stages) {
        CLI::App* cmd = app.add_subcommand(stage.name, stage.help);
        add_common_options(*cmd, overrides);
        bound.emplace_back(cmd, &stage);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        for (const auto& [cmd, stage] : bound) {
            if (cmd->parsed()) {
                stage->fn(resolve_config(*cmd, overrides));
                return 0;
            }
        }
    } catch (const kpifc::Error& e) {
        std::cerr << "kpifc: " << e.what() << std::endl;
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "kpifc: " << e.what() << std::endl;
        return 1;
    }
    return 1;
}
