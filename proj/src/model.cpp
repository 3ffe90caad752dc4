#include "kpifc/model.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>

#include "kpifc/json.hpp"
#include "kpifc/rng.hpp"

namespace kpifc {

namespace {

constexpr double kDivergenceThreshold = 1e6;

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
    return ((-x.array()).exp() + 1.0).inverse().matrix();
}

void check_finite(const Eigen::MatrixXd& m, const std::string& where) {
    if (!m.allFinite()) throw NumericalError("non-finite values in " + where);
}

} // namespace

void ModelConfig::validate() const {
    if (units < 1 || fc_base < 1 || out_features < 1 || time_steps < 1 || in_features < 1)
        throw ConfigError("model: all dimensions must be >= 1");
    if (epochs < 0) throw ConfigError("model: epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("model: batch size must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("model: learning rate must be > 0");
}

namespace {

// Allocates all tensors with the configured shapes, zero-filled.
ModelParams make_params(const ModelConfig& config) {
    ModelParams params;
    const Eigen::Index u = config.units;
    for (int l = 0; l < ModelConfig::kLstmLayers; ++l) {
        const Eigen::Index in_dim = l == 0 ? config.in_features : u;
        LstmLayerParams layer;
        layer.w_in = Eigen::MatrixXd::Zero(in_dim, 4 * u);
        layer.w_rec = Eigen::MatrixXd::Zero(u, 4 * u);
        layer.bias = Eigen::VectorXd::Zero(4 * u);
        params.lstm.push_back(std::move(layer));
    }
    Eigen::Index in_dim = u;
    for (Eigen::Index width : config.fc_widths()) {
        DenseLayerParams fc;
        fc.weights = Eigen::MatrixXd::Zero(in_dim, width);
        fc.bias = Eigen::VectorXd::Zero(width);
        fc.relu = true;
        params.dense.push_back(std::move(fc));
        in_dim = width;
    }
    DenseLayerParams out;
    out.weights = Eigen::MatrixXd::Zero(in_dim, config.out_features);
    out.bias = Eigen::VectorXd::Zero(config.out_features);
    out.relu = false;
    params.dense.push_back(std::move(out));
    return params;
}

} // namespace

ModelState init_model(const ModelConfig& config) {
    config.validate();
    ModelState state;
    state.config = config;
    state.params = make_params(config);

    Rng rng(derive_seed(config.seed, "init"));
    auto fill_uniform = [&rng](Eigen::MatrixXd& m, Eigen::Index fan_in, Eigen::Index fan_out) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        double* data = m.data();
        for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = rng.uniform(-bound, bound);
    };

    const Eigen::Index u = config.units;
    for (auto& layer : state.params.lstm) {
        fill_uniform(layer.w_in, layer.in_dim(), u);
        fill_uniform(layer.w_rec, u, u);
        layer.gate_bias(kForget).setOnes();
    }
    for (auto& fc : state.params.dense) fill_uniform(fc.weights, fc.weights.rows(), fc.weights.cols());
    return state;
}

// ---------------------------------------------------------------------------
// Forward / backward

struct ForwardCache {
    struct LstmCache {
        BatchSequence x;                  // layer input per step
        BatchSequence gi, gf, gg, go;     // gate activations
        BatchSequence c, tanh_c, h;
    };
    struct DenseCache {
        BatchSequence input;
        BatchSequence pre;
    };
    std::vector<LstmCache> lstm;
    std::vector<DenseCache> dense;
    BatchSequence output;
};

namespace {

void lstm_forward(const LstmLayerParams& layer, const BatchSequence& xs,
                  ForwardCache::LstmCache& cache, const std::string& name) {
    const auto steps = xs.size();
    const Eigen::Index bsz = xs[0].rows();
    const Eigen::Index u = layer.units();
    cache.x = xs;
    cache.gi.resize(steps);
    cache.gf.resize(steps);
    cache.gg.resize(steps);
    cache.go.resize(steps);
    cache.c.resize(steps);
    cache.tanh_c.resize(steps);
    cache.h.resize(steps);

    Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(bsz, u);
    Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(bsz, u);
    for (std::size_t t = 0; t < steps; ++t) {
        Eigen::MatrixXd z = xs[t] * layer.w_in + h_prev * layer.w_rec;
        z.rowwise() += layer.bias.transpose();
        cache.gi[t] = sigmoid(z.leftCols(u));
        cache.gf[t] = sigmoid(z.middleCols(u, u));
        cache.gg[t] = z.middleCols(2 * u, u).array().tanh();
        cache.go[t] = sigmoid(z.rightCols(u));
        cache.c[t] = cache.gf[t].cwiseProduct(c_prev) + cache.gi[t].cwiseProduct(cache.gg[t]);
        cache.tanh_c[t] = cache.c[t].array().tanh();
        cache.h[t] = cache.go[t].cwiseProduct(cache.tanh_c[t]);
        check_finite(cache.h[t], name + " output at step " + std::to_string(t));
        h_prev = cache.h[t];
        c_prev = cache.c[t];
    }
}

void dense_forward(const DenseLayerParams& fc, const BatchSequence& xs,
                   ForwardCache::DenseCache& cache, BatchSequence& out, const std::string& name) {
    const auto steps = xs.size();
    cache.input = xs;
    cache.pre.resize(steps);
    out.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        Eigen::MatrixXd pre = xs[t] * fc.weights;
        pre.rowwise() += fc.bias.transpose();
        cache.pre[t] = pre;
        if (fc.relu)
            out[t] = pre.cwiseMax(0.0);
        else
            out[t] = std::move(pre);
        check_finite(out[t], name + " output at step " + std::to_string(t));
    }
}

BatchSequence forward_cached(const ModelState& state, const BatchSequence& xs, ForwardCache& cache) {
    if (xs.empty()) throw ConfigError("forward: empty input sequence");
    if (xs[0].cols() != state.config.in_features)
        throw ConfigError("forward: expected " + std::to_string(state.config.in_features) +
                          " input features, got " + std::to_string(xs[0].cols()));
    if (static_cast<Eigen::Index>(xs.size()) != state.config.time_steps)
        throw ConfigError("forward: expected " + std::to_string(state.config.time_steps) +
                          " time steps, got " + std::to_string(xs.size()));

    cache.lstm.resize(state.params.lstm.size());
    cache.dense.resize(state.params.dense.size());

    const BatchSequence* current = &xs;
    for (std::size_t l = 0; l < state.params.lstm.size(); ++l) {
        lstm_forward(state.params.lstm[l], *current, cache.lstm[l], "lstm" + std::to_string(l));
        current = &cache.lstm[l].h;
    }
    BatchSequence activations = *current;
    for (std::size_t k = 0; k < state.params.dense.size(); ++k) {
        const std::string name =
            k + 1 == state.params.dense.size() ? std::string("out") : "fc" + std::to_string(k);
        BatchSequence next;
        dense_forward(state.params.dense[k], activations, cache.dense[k], next, name);
        activations = std::move(next);
    }
    cache.output = activations;
    return cache.output;
}

void lstm_backward(const LstmLayerParams& layer, const ForwardCache::LstmCache& cache,
                   const BatchSequence& dh_out, LstmLayerParams& grad, BatchSequence& dx) {
    const auto steps = cache.h.size();
    const Eigen::Index bsz = cache.h[0].rows();
    const Eigen::Index u = layer.units();
    dx.assign(steps, Eigen::MatrixXd());

    Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(bsz, u);
    Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(bsz, u);
    Eigen::MatrixXd dz(bsz, 4 * u);
    for (std::size_t t = steps; t-- > 0;) {
        const Eigen::MatrixXd dh = dh_out[t] + dh_next;
        const auto& gi = cache.gi[t];
        const auto& gf = cache.gf[t];
        const auto& gg = cache.gg[t];
        const auto& go = cache.go[t];
        const auto& tc = cache.tanh_c[t];

        const Eigen::MatrixXd dgo = dh.cwiseProduct(tc);
        const Eigen::MatrixXd dc =
            dc_next + (dh.array() * go.array() * (1.0 - tc.array().square())).matrix();

        dz.rightCols(u) = (dgo.array() * go.array() * (1.0 - go.array())).matrix();
        if (t > 0) {
            dz.middleCols(u, u) =
                (dc.array() * cache.c[t - 1].array() * gf.array() * (1.0 - gf.array())).matrix();
        } else {
            dz.middleCols(u, u).setZero(); // c_{-1} = 0
        }
        dz.leftCols(u) = (dc.array() * gg.array() * gi.array() * (1.0 - gi.array())).matrix();
        dz.middleCols(2 * u, u) = (dc.array() * gi.array() * (1.0 - gg.array().square())).matrix();

        grad.w_in.noalias() += cache.x[t].transpose() * dz;
        if (t > 0) grad.w_rec.noalias() += cache.h[t - 1].transpose() * dz;
        grad.bias += dz.colwise().sum().transpose();

        dx[t].noalias() = dz * layer.w_in.transpose();
        dh_next.noalias() = dz * layer.w_rec.transpose();
        dc_next = dc.cwiseProduct(gf);
    }
}

void dense_backward(const DenseLayerParams& fc, const ForwardCache::DenseCache& cache,
                    const BatchSequence& dout, DenseLayerParams& grad, BatchSequence& dx) {
    const auto steps = dout.size();
    dx.assign(steps, Eigen::MatrixXd());
    for (std::size_t t = 0; t < steps; ++t) {
        Eigen::MatrixXd dpre =
            fc.relu ? (dout[t].array() * (cache.pre[t].array() > 0.0).cast<double>()).matrix()
                    : dout[t];
        grad.weights.noalias() += cache.input[t].transpose() * dpre;
        grad.bias += dpre.colwise().sum().transpose();
        dx[t].noalias() = dpre * fc.weights.transpose();
    }
}

} // namespace

BatchSequence forward_batch(const ModelState& state, const BatchSequence& xs) {
    ForwardCache cache;
    return forward_cached(state, xs, cache);
}

BatchSequence lstm_layer_forward(const LstmLayerParams& layer, const BatchSequence& xs) {
    if (xs.empty()) throw ConfigError("lstm_layer_forward: empty input sequence");
    ForwardCache::LstmCache cache;
    lstm_forward(layer, xs, cache, "lstm");
    return cache.h;
}

Eigen::MatrixXd forward(const ModelState& state, const Eigen::MatrixXd& x) {
    if (x.rows() != state.config.time_steps || x.cols() != state.config.in_features)
        throw ConfigError("forward: input must be " + std::to_string(state.config.time_steps) + "x" +
                          std::to_string(state.config.in_features) + ", got " +
                          std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    BatchSequence xs(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index t = 0; t < x.rows(); ++t) xs[static_cast<std::size_t>(t)] = x.row(t);
    const BatchSequence out = forward_batch(state, xs);
    Eigen::MatrixXd y(x.rows(), state.config.out_features);
    for (Eigen::Index t = 0; t < x.rows(); ++t) y.row(t) = out[static_cast<std::size_t>(t)].row(0);
    return y;
}

Eigen::MatrixXd label_align(const Eigen::MatrixXd& y_hat, Eigen::Index w_lbl) {
    if (w_lbl > y_hat.rows())
        throw ConfigError("label_align: w_lbl (" + std::to_string(w_lbl) +
                          ") exceeds sequence length (" + std::to_string(y_hat.rows()) + ")");
    return y_hat.bottomRows(w_lbl);
}

double mse_loss(const BatchSequence& pred, const BatchSequence& target) {
    if (pred.size() != target.size()) throw ConfigError("mse_loss: label length mismatch");
    if (pred.empty()) throw ConfigError("mse_loss: empty prediction");
    double sum = 0.0;
    double count = 0.0;
    for (std::size_t tau = 0; tau < pred.size(); ++tau) {
        if (pred[tau].rows() != target[tau].rows() || pred[tau].cols() != target[tau].cols())
            throw ConfigError("mse_loss: shape mismatch");
        sum += (pred[tau] - target[tau]).squaredNorm();
        count += static_cast<double>(pred[tau].size());
    }
    return sum / count;
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ConfigError("mse_loss: shape mismatch");
    if (pred.size() == 0) throw ConfigError("mse_loss: empty prediction");
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

Gradients backward(const ModelState& state, const BatchSequence& xs, const BatchSequence& targets,
                   double* loss_out) {
    ForwardCache cache;
    const BatchSequence output = forward_cached(state, xs, cache);
    const auto steps = xs.size();
    const auto w_lbl = targets.size();
    if (w_lbl == 0 || w_lbl > steps) throw ConfigError("backward: invalid label window");

    const Eigen::Index bsz = xs[0].rows();
    const double norm = static_cast<double>(bsz) * static_cast<double>(w_lbl) *
                        static_cast<double>(state.config.out_features);

    // dL/d(output): zero outside the aligned label steps.
    BatchSequence dout(steps);
    double loss = 0.0;
    for (std::size_t t = 0; t < steps; ++t)
        dout[t] = Eigen::MatrixXd::Zero(bsz, state.config.out_features);
    for (std::size_t tau = 0; tau < w_lbl; ++tau) {
        const std::size_t t = steps - w_lbl + tau;
        if (targets[tau].rows() != bsz || targets[tau].cols() != state.config.out_features)
            throw ConfigError("backward: target shape mismatch");
        const Eigen::MatrixXd residual = output[t] - targets[tau];
        loss += residual.squaredNorm();
        dout[t] = (2.0 / norm) * residual;
    }
    loss /= norm;
    if (loss_out) *loss_out = loss;

    Gradients grads = make_params(state.config);
    BatchSequence grad_flow = std::move(dout);
    for (std::size_t k = state.params.dense.size(); k-- > 0;) {
        BatchSequence dx;
        dense_backward(state.params.dense[k], cache.dense[k], grad_flow, grads.dense[k], dx);
        grad_flow = std::move(dx);
    }
    for (std::size_t l = state.params.lstm.size(); l-- > 0;) {
        BatchSequence dx;
        lstm_backward(state.params.lstm[l], cache.lstm[l], grad_flow, grads.lstm[l], dx);
        grad_flow = std::move(dx);
    }

    visit_tensors(grads, [](const std::string& name, const auto& tensor) {
        if (!tensor.allFinite()) throw NumericalError("non-finite gradient in " + name);
    });
    return grads;
}

void sgd_step(ModelState& state, const Gradients& grads, double eta) {
    auto apply = [eta](auto& param, const auto& grad, const std::string& name) {
        if (param.rows() != grad.rows() || param.cols() != grad.cols())
            throw ConfigError("sgd_step: gradient shape mismatch in " + name);
        param -= eta * grad;
        if (!param.allFinite()) throw NumericalError("non-finite parameter after update in " + name);
    };
    for (std::size_t l = 0; l < state.params.lstm.size(); ++l) {
        const std::string prefix = "lstm" + std::to_string(l);
        apply(state.params.lstm[l].w_in, grads.lstm[l].w_in, prefix + ".w_in");
        apply(state.params.lstm[l].w_rec, grads.lstm[l].w_rec, prefix + ".w_rec");
        apply(state.params.lstm[l].bias, grads.lstm[l].bias, prefix + ".bias");
    }
    for (std::size_t k = 0; k < state.params.dense.size(); ++k) {
        const std::string prefix =
            k + 1 == state.params.dense.size() ? std::string("out") : "fc" + std::to_string(k);
        apply(state.params.dense[k].weights, grads.dense[k].weights, prefix + ".weights");
        apply(state.params.dense[k].bias, grads.dense[k].bias, prefix + ".bias");
    }
}

BatchSequence gather_inputs(const WindowSet& ws, const std::vector<Eigen::Index>& idx) {
    if (idx.empty() || ws.pairs.empty()) throw ConfigError("gather_inputs: empty batch");
    const Eigen::Index steps = ws.pairs[0].input.rows();
    const Eigen::Index d = ws.pairs[0].input.cols();
    BatchSequence xs(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
        Eigen::MatrixXd& slice = xs[static_cast<std::size_t>(t)];
        slice.resize(static_cast<Eigen::Index>(idx.size()), d);
        for (std::size_t b = 0; b < idx.size(); ++b)
            slice.row(static_cast<Eigen::Index>(b)) = ws.pairs[static_cast<std::size_t>(idx[b])].input.row(t);
    }
    return xs;
}

BatchSequence gather_labels(const WindowSet& ws, const std::vector<Eigen::Index>& idx) {
    if (idx.empty() || ws.pairs.empty()) throw ConfigError("gather_labels: empty batch");
    const Eigen::Index w_lbl = ws.pairs[0].label.rows();
    const Eigen::Index c = ws.pairs[0].label.cols();
    BatchSequence ys(static_cast<std::size_t>(w_lbl));
    for (Eigen::Index tau = 0; tau < w_lbl; ++tau) {
        Eigen::MatrixXd& slice = ys[static_cast<std::size_t>(tau)];
        slice.resize(static_cast<Eigen::Index>(idx.size()), c);
        for (std::size_t b = 0; b < idx.size(); ++b)
            slice.row(static_cast<Eigen::Index>(b)) = ws.pairs[static_cast<std::size_t>(idx[b])].label.row(tau);
    }
    return ys;
}

double evaluate_loss(const ModelState& state, const WindowSet& windows) {
    if (windows.pairs.empty()) throw ConfigError("evaluate_loss: empty window set");
    const Eigen::Index w_lbl = windows.pairs[0].label.rows();
    const auto batches = batch(windows, state.config.batch_size, false, 0);
    double sum = 0.0;
    double count = 0.0;
    for (const auto& idx : batches) {
        const BatchSequence xs = gather_inputs(windows, idx);
        const BatchSequence ys = gather_labels(windows, idx);
        const BatchSequence out = forward_batch(state, xs);
        for (Eigen::Index tau = 0; tau < w_lbl; ++tau) {
            const auto t = out.size() - static_cast<std::size_t>(w_lbl - tau);
            sum += (out[t] - ys[static_cast<std::size_t>(tau)]).squaredNorm();
            count += static_cast<double>(ys[static_cast<std::size_t>(tau)].size());
        }
    }
    return sum / count;
}

std::vector<Eigen::MatrixXd> predict(const ModelState& state, const WindowSet& windows,
                                     Eigen::Index w_lbl) {
    if (windows.pairs.empty()) return {};
    if (w_lbl > state.config.time_steps)
        throw ConfigError("predict: w_lbl exceeds model time steps");
    std::vector<Eigen::MatrixXd> result(windows.pairs.size());
    const auto batches = batch(windows, state.config.batch_size, false, 0);
    for (const auto& idx : batches) {
        const BatchSequence xs = gather_inputs(windows, idx);
        const BatchSequence out = forward_batch(state, xs);
        for (std::size_t b = 0; b < idx.size(); ++b) {
            Eigen::MatrixXd aligned(w_lbl, state.config.out_features);
            for (Eigen::Index tau = 0; tau < w_lbl; ++tau) {
                const auto t = out.size() - static_cast<std::size_t>(w_lbl - tau);
                aligned.row(tau) = out[t].row(static_cast<Eigen::Index>(b));
            }
            result[static_cast<std::size_t>(idx[b])] = std::move(aligned);
        }
    }
    return result;
}

TrainHistory train(ModelState& state, const WindowSet& train_windows, const WindowSet& val_windows,
                   const ProgressFn& progress) {
    if (train_windows.pairs.empty() || val_windows.pairs.empty())
        throw ConfigError("train: empty window set");
    const auto& first = train_windows.pairs[0];
    if (first.input.rows() != state.config.time_steps ||
        first.input.cols() != state.config.in_features ||
        first.label.cols() != state.config.out_features)
        throw ConfigError("train: window shapes do not match model config");

    TrainHistory history;
    for (int epoch = 1; epoch <= state.config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t shuffle_seed =
            derive_seed(state.config.seed ^ static_cast<std::uint64_t>(epoch), "shuffle");
        const auto batches = batch(train_windows, state.config.batch_size, true, shuffle_seed);
        for (const auto& idx : batches) {
            const BatchSequence xs = gather_inputs(train_windows, idx);
            const BatchSequence ys = gather_labels(train_windows, idx);
            const Gradients grads = backward(state, xs, ys);
            sgd_step(state, grads, state.config.learning_rate);
        }
        const double train_loss = evaluate_loss(state, train_windows);
        const double val_loss = evaluate_loss(state, val_windows);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss) ||
            train_loss > kDivergenceThreshold || val_loss > kDivergenceThreshold)
            throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                                 " (train loss " + std::to_string(train_loss) + ", val loss " +
                                 std::to_string(val_loss) + "); reduce the learning rate");
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        history.entries.push_back({epoch, train_loss, val_loss, seconds});
        if (progress) progress(epoch, train_loss, val_loss);
    }
    return history;
}

std::string TrainHistory::to_csv() const {
    std::string out = "epoch,train_loss,val_loss,wall_clock_sec\n";
    for (const auto& e : entries) {
        out += std::to_string(e.epoch);
        out.push_back(',');
        out += format_double(e.train_loss);
        out.push_back(',');
        out += format_double(e.val_loss);
        out.push_back(',');
        out += format_double(e.seconds);
        out.push_back('\n');
    }
    return out;
}

void TrainHistory::save(const std::string& path) const { write_file(path, to_csv()); }

// ---------------------------------------------------------------------------
// Checkpoints
//
// Layout: 8-byte magic, little-endian u64 header length, JSON header
// (config, scaler, sidecar path, dimension-tagged tensor index), then the
// tensor payload as 64-bit little-endian doubles in index order.

namespace {

constexpr char kMagic[8] = {'K', 'P', 'F', 'C', 'C', 'K', 'P', '1'};

void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t read_u64_le(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

void append_doubles_le(std::string& out, const double* data, Eigen::Index n) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.append(reinterpret_cast<const char*>(data), static_cast<std::size_t>(n) * 8);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, data + i, 8);
            append_u64_le(out, bits);
        }
    }
}

void read_doubles_le(const char* p, double* data, Eigen::Index n) {
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(data, p, static_cast<std::size_t>(n) * 8);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::uint64_t bits = read_u64_le(p + i * 8);
            std::memcpy(data + i, &bits, 8);
        }
    }
}

JsonNode config_to_json(const ModelConfig& config) {
    JsonNode node = JsonNode::object();
    node.set("units", JsonNode(static_cast<double>(config.units)));
    node.set("fc_base", JsonNode(static_cast<double>(config.fc_base)));
    node.set("out_features", JsonNode(static_cast<double>(config.out_features)));
    node.set("time_steps", JsonNode(static_cast<double>(config.time_steps)));
    node.set("in_features", JsonNode(static_cast<double>(config.in_features)));
    node.set("learning_rate", JsonNode(config.learning_rate));
    node.set("epochs", JsonNode(static_cast<double>(config.epochs)));
    node.set("batch_size", JsonNode(static_cast<double>(config.batch_size)));
    node.set("seed", JsonNode(static_cast<double>(config.seed)));
    return node;
}

ModelConfig config_from_json(const JsonNode& node) {
    auto get = [&node](const char* key) {
        const JsonNode* v = node.find(key);
        if (!v || !v->is_number()) throw DataError(std::string("checkpoint: missing field ") + key);
        return v->as_number();
    };
    ModelConfig config;
    config.units = static_cast<Eigen::Index>(get("units"));
    config.fc_base = static_cast<Eigen::Index>(get("fc_base"));
    config.out_features = static_cast<Eigen::Index>(get("out_features"));
    config.time_steps = static_cast<Eigen::Index>(get("time_steps"));
    config.in_features = static_cast<Eigen::Index>(get("in_features"));
    config.learning_rate = get("learning_rate");
    config.epochs = static_cast<int>(get("epochs"));
    config.batch_size = static_cast<Eigen::Index>(get("batch_size"));
    config.seed = static_cast<std::uint64_t>(get("seed"));
    return config;
}

} // namespace

void save_checkpoint(const ModelState& state, const std::string& path) {
    JsonNode header = JsonNode::object();
    header.set("version", JsonNode(1.0));
    header.set("config", config_to_json(state.config));

    JsonNode scaler = JsonNode::object();
    JsonNode min_arr = JsonNode::array();
    JsonNode max_arr = JsonNode::array();
    for (Eigen::Index j = 0; j < state.scaler.features(); ++j) {
        min_arr.push_back(JsonNode(state.scaler.x_min[j]));
        max_arr.push_back(JsonNode(state.scaler.x_max[j]));
    }
    scaler.set("x_min", std::move(min_arr));
    scaler.set("x_max", std::move(max_arr));
    header.set("scaler", std::move(scaler));
    header.set("scaler_sidecar", JsonNode(state.scaler_sidecar));

    JsonNode tensors = JsonNode::array();
    visit_tensors(state.params,
                  [&tensors](const std::string& name, const auto& tensor) {
                      JsonNode entry = JsonNode::object();
                      entry.set("name", JsonNode(name));
                      entry.set("rows", JsonNode(static_cast<double>(tensor.rows())));
                      entry.set("cols", JsonNode(static_cast<double>(tensor.cols())));
                      tensors.push_back(std::move(entry));
                  });
    header.set("tensors", std::move(tensors));

    const std::string header_json = write_json(header);
    std::string out(kMagic, sizeof kMagic);
    append_u64_le(out, header_json.size());
    out += header_json;
    visit_tensors(state.params, [&out](const std::string&, const auto& tensor) {
        append_doubles_le(out, tensor.data(), tensor.size());
    });
    write_file(path, out);
}

ModelState load_checkpoint(const std::string& path) {
    const std::string blob = read_file(path);
    if (blob.size() < sizeof kMagic + 8 || std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0)
        throw DataError("checkpoint: bad magic in " + path);
    const std::uint64_t header_len = read_u64_le(blob.data() + sizeof kMagic);
    if (blob.size() < sizeof kMagic + 8 + header_len)
        throw DataError("checkpoint: truncated header in " + path);
    const JsonNode header = parse_json(std::string_view(blob).substr(sizeof kMagic + 8, header_len));

    ModelState state;
    const JsonNode* config_node = header.find("config");
    if (!config_node) throw DataError("checkpoint: missing config");
    state.config = config_from_json(*config_node);
    state.params = make_params(state.config);

    if (const JsonNode* scaler = header.find("scaler")) {
        const JsonNode* min_arr = scaler->find("x_min");
        const JsonNode* max_arr = scaler->find("x_max");
        if (min_arr && max_arr && min_arr->is_array()) {
            const auto d = static_cast<Eigen::Index>(min_arr->items().size());
            state.scaler.x_min.resize(d);
            state.scaler.x_max.resize(d);
            for (Eigen::Index j = 0; j < d; ++j) {
                state.scaler.x_min[j] = min_arr->items()[static_cast<std::size_t>(j)].as_number();
                state.scaler.x_max[j] = max_arr->items()[static_cast<std::size_t>(j)].as_number();
            }
        }
    }
    if (const JsonNode* sidecar = header.find("scaler_sidecar"))
        state.scaler_sidecar = sidecar->as_string();

    const JsonNode* tensors = header.find("tensors");
    if (!tensors || !tensors->is_array()) throw DataError("checkpoint: missing tensor index");
    std::size_t cursor = sizeof kMagic + 8 + header_len;
    std::size_t entry = 0;
    visit_tensors(state.params, [&](const std::string& name, auto& tensor) {
        if (entry >= tensors->items().size()) throw DataError("checkpoint: tensor index too short");
        const JsonNode& meta = tensors->items()[entry++];
        const JsonNode* meta_name = meta.find("name");
        const JsonNode* meta_rows = meta.find("rows");
        const JsonNode* meta_cols = meta.find("cols");
        if (!meta_name || meta_name->as_string() != name ||
            !meta_rows || static_cast<Eigen::Index>(meta_rows->as_number()) != tensor.rows() ||
            !meta_cols || static_cast<Eigen::Index>(meta_cols->as_number()) != tensor.cols())
            throw DataError("checkpoint: tensor mismatch at " + name);
        const auto bytes = static_cast<std::size_t>(tensor.size()) * 8;
        if (cursor + bytes > blob.size()) throw DataError("checkpoint: truncated tensor data");
        read_doubles_le(blob.data() + cursor, tensor.data(), tensor.size());
        cursor += bytes;
    });
    if (entry != tensors->items().size()) throw DataError("checkpoint: extra tensor entries");
    return state;
}

} // namespace kpifc
