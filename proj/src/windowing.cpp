#include "kpifc/windowing.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "kpifc/rng.hpp"

namespace kpifc {

void WindowSpec::validate() const {
    if (w_in < 1) throw ConfigError("window: w_in must be >= 1");
    if (w_lbl < 1) throw ConfigError("window: w_lbl must be >= 1");
    if (shift < 0) throw ConfigError("window: shift must be >= 0");
    if (w_lbl > w_tot())
        throw ConfigError("window: w_lbl (" + std::to_string(w_lbl) + ") exceeds w_tot (" +
                          std::to_string(w_tot()) + ")");
}

FeatureSelector FeatureSelector::head(Eigen::Index c) {
    FeatureSelector sel;
    sel.indices.resize(static_cast<std::size_t>(c));
    std::iota(sel.indices.begin(), sel.indices.end(), Eigen::Index{0});
    return sel;
}

void FeatureSelector::validate(Eigen::Index d) const {
    if (indices.empty()) throw ConfigError("feature selector: no label features");
    std::vector<Eigen::Index> sorted = indices;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("feature selector: duplicate feature index");
    if (sorted.front() < 0 || sorted.back() >= d)
        throw ConfigError("feature selector: index out of range for d=" + std::to_string(d));
}

Eigen::Index window_count(Eigen::Index n, const WindowSpec& spec) {
    return n - spec.w_tot() - spec.w_lbl + 1;
}

WindowSet make_windows(const Eigen::MatrixXd& series, const WindowSpec& spec,
                       const FeatureSelector& sel) {
    spec.validate();
    sel.validate(series.cols());
    const Eigen::Index n = series.rows();
    const Eigen::Index m = window_count(n, spec);
    if (m <= 0)
        throw DataError("window: split of length " + std::to_string(n) + " is too short; need at least " +
                        std::to_string(spec.w_tot() + spec.w_lbl) + " rows");

    const auto c = static_cast<Eigen::Index>(sel.indices.size());
    WindowSet ws;
    ws.pairs.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index t = 0; t < m; ++t) {
        Window w;
        w.input = series.middleRows(t, spec.w_in);
        w.label.resize(spec.w_lbl, c);
        const Eigen::Index label_start = t + spec.w_tot() - spec.w_lbl;
        for (Eigen::Index j = 0; j < c; ++j)
            w.label.col(j) = series.col(sel.indices[static_cast<std::size_t>(j)])
                                 .segment(label_start, spec.w_lbl);
        ws.pairs.push_back(std::move(w));
    }
    return ws;
}

std::vector<std::vector<Eigen::Index>> batch(const WindowSet& ws, Eigen::Index batch_size,
                                             bool shuffle, std::uint64_t seed) {
    if (batch_size < 1) throw ConfigError("batch: batch size must be >= 1");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(ws.count()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    if (shuffle) {
        Rng rng(seed);
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
    }
    std::vector<std::vector<Eigen::Index>> batches;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

} // namespace kpifc
