#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "kpifc/error.hpp"

namespace kpifc {

struct WindowSpec {
    Eigen::Index w_in = 1;
    Eigen::Index w_lbl = 1;
    Eigen::Index shift = 0;

    Eigen::Index w_tot() const { return w_in + shift; }
    void validate() const;
};

// Label feature columns (0-based); defines d' = C and the projection from
// full rows to label rows. Default: the first `c` columns.
struct FeatureSelector {
    std::vector<Eigen::Index> indices;

    static FeatureSelector head(Eigen::Index c);
    void validate(Eigen::Index d) const;
};

struct Window {
    Eigen::MatrixXd input; // w_in x d
    Eigen::MatrixXd label; // w_lbl x C
};

struct WindowSet {
    std::vector<Window> pairs;
    Eigen::Index count() const { return static_cast<Eigen::Index>(pairs.size()); }
};

// Number of pairs for a split of length n: n - w_tot - w_lbl + 1 (may be <= 0).
Eigen::Index window_count(Eigen::Index n, const WindowSpec& spec);

// Pair t (0-based): input = series rows [t, t+w_in-1], label = rows
// [t+w_tot-w_lbl, t+w_tot-1] restricted to the selected feature columns.
WindowSet make_windows(const Eigen::MatrixXd& series, const WindowSpec& spec,
                       const FeatureSelector& sel);

// Deterministic batching: index batches of size <= batch_size covering every
// pair exactly once; with shuffle, the order is a seeded permutation.
std::vector<std::vector<Eigen::Index>> batch(const WindowSet& ws, Eigen::Index batch_size,
                                             bool shuffle, std::uint64_t seed);

} // namespace kpifc
