#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kpifc/preprocess.hpp"
#include "kpifc/windowing.hpp"

namespace kpifc {

// Network: LSTM(units) x3 -> FC(4h) -> FC(2h) -> FC(h) -> Linear(out_features),
// FC layers time-distributed with ReLU, trained with plain gradient descent.
struct ModelConfig {
    Eigen::Index units = 32;        // LSTM hidden size
    Eigen::Index fc_base = 16;      // h; FC widths are 4h, 2h, h
    Eigen::Index out_features = 1;  // C
    Eigen::Index time_steps = 12;   // T = w_in
    Eigen::Index in_features = 1;   // d
    double learning_rate = 1e-3;
    int epochs = 1;
    Eigen::Index batch_size = 32;
    std::uint64_t seed = 0;

    static constexpr int kLstmLayers = 3;

    std::vector<Eigen::Index> fc_widths() const { return {4 * fc_base, 2 * fc_base, fc_base}; }
    void validate() const;
};

// Gate order within the concatenated weight blocks.
enum Gate : int { kInput = 0, kForget = 1, kCandidate = 2, kOutput = 3 };

// One LSTM layer; the four gates are stored as column blocks [i|f|g|o] so a
// timestep costs two matrix products instead of eight.
struct LstmLayerParams {
    Eigen::MatrixXd w_in;  // in_dim x 4u
    Eigen::MatrixXd w_rec; // u x 4u
    Eigen::VectorXd bias;  // 4u

    Eigen::Index units() const { return w_rec.rows(); }
    Eigen::Index in_dim() const { return w_in.rows(); }

    auto gate_w_in(int g) { return w_in.middleCols(g * units(), units()); }
    auto gate_w_in(int g) const { return w_in.middleCols(g * units(), units()); }
    auto gate_w_rec(int g) { return w_rec.middleCols(g * units(), units()); }
    auto gate_w_rec(int g) const { return w_rec.middleCols(g * units(), units()); }
    auto gate_bias(int g) { return bias.segment(g * units(), units()); }
    auto gate_bias(int g) const { return bias.segment(g * units(), units()); }
};

struct DenseLayerParams {
    Eigen::MatrixXd weights; // in x out
    Eigen::VectorXd bias;    // out
    bool relu = true;        // false = identity (output layer)
};

struct ModelParams {
    std::vector<LstmLayerParams> lstm;  // kLstmLayers entries
    std::vector<DenseLayerParams> dense; // 3 ReLU FC + 1 linear output
};

using Gradients = ModelParams;

// Visits every parameter tensor in a fixed order (also the checkpoint and
// finite-difference order).
template <typename Params, typename F>
void visit_tensors(Params& params, F&& f) {
    for (std::size_t l = 0; l < params.lstm.size(); ++l) {
        const std::string prefix = "lstm" + std::to_string(l);
        f(prefix + ".w_in", params.lstm[l].w_in);
        f(prefix + ".w_rec", params.lstm[l].w_rec);
        f(prefix + ".bias", params.lstm[l].bias);
    }
    for (std::size_t k = 0; k < params.dense.size(); ++k) {
        const std::string prefix =
            k + 1 == params.dense.size() ? std::string("out") : "fc" + std::to_string(k);
        f(prefix + ".weights", params.dense[k].weights);
        f(prefix + ".bias", params.dense[k].bias);
    }
}

struct ModelState {
    ModelConfig config;
    ModelParams params;
    ScalerParams scaler;        // carried for inverse scaling at inference
    std::string scaler_sidecar; // path of the sidecar the scaler was read from
};

struct TrainHistory {
    struct Entry {
        int epoch;
        double train_loss;
        double val_loss;
        double seconds;
    };
    std::vector<Entry> entries;

    std::string to_csv() const;
    void save(const std::string& path) const;
};

// Sequences are handled as per-timestep batches: seq[t] is B x width.
using BatchSequence = std::vector<Eigen::MatrixXd>;

// Deterministic initialization: weights uniform in +-sqrt(6/(fan_in+fan_out)),
// biases zero except the LSTM forget-gate bias, which starts at 1.
ModelState init_model(const ModelConfig& config);

// Single-window forward pass: X is T x d, result is T x C.
Eigen::MatrixXd forward(const ModelState& state, const Eigen::MatrixXd& x);

// Last w_lbl rows of a T x C output.
Eigen::MatrixXd label_align(const Eigen::MatrixXd& y_hat, Eigen::Index w_lbl);

// Mean over batch, label step and feature of the squared difference.
double mse_loss(const BatchSequence& pred, const BatchSequence& target);
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

struct ForwardCache; // internal; defined in model.cpp

// Forward over a batch of windows; xs[t] is B x d, result[t] is B x C.
BatchSequence forward_batch(const ModelState& state, const BatchSequence& xs);

// One LSTM layer's hidden-state sequence (zero initial state), exposed so the
// cell recursion can be checked against hand-evaluated equations.
BatchSequence lstm_layer_forward(const LstmLayerParams& layer, const BatchSequence& xs);

// Exact gradients of the batch MSE loss w.r.t. every parameter, by
// backpropagation through time across all T steps. Steps outside the label
// window contribute zero.
Gradients backward(const ModelState& state, const BatchSequence& xs, const BatchSequence& targets,
                   double* loss_out = nullptr);

// Plain gradient-descent update, in place.
void sgd_step(ModelState& state, const Gradients& grads, double eta);

using ProgressFn = std::function<void(int epoch, double train_loss, double val_loss)>;

// Runs `epochs` passes of shuffled mini-batch gradient descent; records the
// post-epoch loss over the full train and validation sets. Aborts with
// NumericalError if the loss diverges (> 1e6) or goes non-finite.
TrainHistory train(ModelState& state, const WindowSet& train_windows, const WindowSet& val_windows,
                   const ProgressFn& progress = nullptr);

// Loss of the current parameters over a whole window set, no updates.
double evaluate_loss(const ModelState& state, const WindowSet& windows);

// Aligned predictions per window: M matrices of shape w_lbl x C.
std::vector<Eigen::MatrixXd> predict(const ModelState& state, const WindowSet& windows,
                                     Eigen::Index w_lbl);

void save_checkpoint(const ModelState& state, const std::string& path);
ModelState load_checkpoint(const std::string& path);

// Assembles xs[t] (B x d) and targets[tau] (B x C) for the given window indices.
BatchSequence gather_inputs(const WindowSet& ws, const std::vector<Eigen::Index>& idx);
BatchSequence gather_labels(const WindowSet& ws, const std::vector<Eigen::Index>& idx);

} // namespace kpifc
