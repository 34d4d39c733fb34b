#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"

namespace isoguard {

struct ForestParams {
    int num_trees = 256;
    int subsample_size = 256;
    int height_limit = 0;  // 0: auto, ceil(log2(subsample_size))
    uint64_t seed = 1;

    void validate() const;
    int effective_height_limit() const;
};

// Flat tree node. Internal nodes carry the split and child indices; external
// nodes carry the count of training instances that ended there.
struct TreeNode {
    int32_t left = -1;
    int32_t right = -1;
    int32_t split_feature = -1;
    double split_value = 0.0;
    int64_t size = 0;

    bool is_external() const { return left < 0; }
};

struct IsolationTree {
    std::vector<TreeNode> nodes;  // node 0 is the root
    int64_t sample_count = 0;     // instances this tree was built on

    // h(x): edges from root to the external node x falls into, plus the
    // c(size) adjustment for unresolved partitions.
    double path_length(std::span<const double> x) const;
};

// Average path length of unsuccessful BST search; normalizes h(x).
// 0 for n <= 1; exact harmonic numbers for n - 1 <= 1000, the
// ln(i) + Euler-gamma approximation beyond.
double avg_path_length_c(int64_t n);

// Builds one isolation tree over the given sample rows. Splits choose a
// feature uniformly among those with min < max in the partition, then a split
// value uniformly on the open interval (min, max). Recursion stops at
// singletons, all-constant partitions, or the height limit.
IsolationTree build_tree(const FeatureMatrix& data, std::span<const size_t> sample_rows,
                         int height_limit, Rng& rng);

class IsolationForestModel {
public:
    IsolationForestModel() = default;

    // Draws params.num_trees subsamples of size min(subsample_size, rows)
    // without replacement (independently per tree) and builds one tree per
    // subsample. n_train is stored once at fit time as a constant.
    static IsolationForestModel fit(const FeatureMatrix& data, const ForestParams& params,
                                    int threads = 1);

    // Restores a fitted model (persistence path).
    IsolationForestModel(std::vector<IsolationTree> trees, ForestParams params, int64_t n_train);

    bool fitted() const { return !trees_.empty(); }
    const std::vector<IsolationTree>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }
    int64_t n_train() const { return n_train_; }
    size_t dim() const { return dim_; }

    // Per-tree sample size used as n in Eq-style score normalization:
    // min(subsample_size, n_train).
    int64_t effective_sample_size() const;

    // Mean path length across trees.
    double mean_path_length(std::span<const double> x) const;

    // s(x) = 2^(-E(h(x)) / c(n_eff)), in (0, 1]; near 1 means anomalous.
    double anomaly_score(std::span<const double> x) const;

    std::vector<double> score_batch(const FeatureMatrix& data, int threads = 1) const;

private:
    std::vector<IsolationTree> trees_;
    ForestParams params_;
    int64_t n_train_ = 0;
    size_t dim_ = 0;
    double c_norm_ = 0.0;  // cached c(effective_sample_size())

    void finish_init();
};

}  // namespace isoguard
