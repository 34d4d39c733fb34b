#include "iforest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "errors.hpp"
#include "parallel.hpp"

namespace isoguard {

namespace {

constexpr double kEulerGamma = 0.5772156649;
constexpr int kExactHarmonicLimit = 1000;

const double* exact_harmonic_table() {
    static const auto table = [] {
        static double h[kExactHarmonicLimit + 1];
        h[0] = 0.0;
        for (int i = 1; i <= kExactHarmonicLimit; ++i) h[i] = h[i - 1] + 1.0 / i;
        return h;
    }();
    return table;
}

double harmonic(int64_t i) {
    if (i <= 0) return 0.0;
    if (i <= kExactHarmonicLimit) return exact_harmonic_table()[i];
    return std::log(static_cast<double>(i)) + kEulerGamma;
}

}  // namespace

void ForestParams::validate() const {
    if (num_trees < 1) throw_usage("num_trees must be >= 1");
    if (subsample_size < 2) throw_usage("subsample_size must be >= 2");
    if (height_limit < 0) throw_usage("height_limit must be >= 1 (or 0 for auto)");
}

int ForestParams::effective_height_limit() const {
    if (height_limit > 0) return height_limit;
    int limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(subsample_size))));
    return std::max(limit, 1);
}

double avg_path_length_c(int64_t n) {
    if (n <= 1) return 0.0;
    const double nn = static_cast<double>(n);
    return 2.0 * harmonic(n - 1) - 2.0 * (nn - 1.0) / nn;
}

double IsolationTree::path_length(std::span<const double> x) const {
    const TreeNode* node = &nodes[0];
    double edges = 0.0;
    while (!node->is_external()) {
        const int32_t f = node->split_feature;
        if (static_cast<size_t>(f) >= x.size())
            throw_data("feature index " + std::to_string(f) + " out of range for a " +
                       std::to_string(x.size()) + "-dimensional input");
        node = &nodes[x[static_cast<size_t>(f)] < node->split_value ? node->left : node->right];
        edges += 1.0;
    }
    return edges + avg_path_length_c(node->size);
}

namespace {

// True when (lo, hi) contains at least one representable double.
bool has_interior_point(double lo, double hi) {
    return lo < hi && std::nextafter(lo, hi) < hi;
}

// Uniform draw on the open interval (lo, hi); the caller guarantees an
// interior point exists.
double draw_split_value(Rng& rng, double lo, double hi) {
    for (int attempt = 0; attempt < 16; ++attempt) {
        const double v = lo + rng.uniform_open01() * (hi - lo);
        if (v > lo && v < hi) return v;
    }
    return std::nextafter(lo, hi);
}

struct TreeBuilder {
    const FeatureMatrix& data;
    int height_limit;
    Rng& rng;
    std::vector<TreeNode>& nodes;
    std::vector<size_t>& rows;   // permuted in place during partitioning
    std::vector<double> lo;      // per-feature min over the current partition
    std::vector<double> hi;
    std::vector<int32_t> eligible;

    int32_t build(size_t begin, size_t end, int depth) {
        const size_t count = end - begin;
        const int32_t id = static_cast<int32_t>(nodes.size());
        nodes.emplace_back();

        if (depth >= height_limit || count <= 1) {
            nodes[id].size = static_cast<int64_t>(count);
            return id;
        }

        const size_t dim = data.dim();
        for (size_t f = 0; f < dim; ++f) {
            lo[f] = hi[f] = data.row(rows[begin])[f];
        }
        for (size_t i = begin + 1; i < end; ++i) {
            const auto row = data.row(rows[i]);
            for (size_t f = 0; f < dim; ++f) {
                lo[f] = std::min(lo[f], row[f]);
                hi[f] = std::max(hi[f], row[f]);
            }
        }

        // Constant features carry no split; a fully constant partition is done.
        eligible.clear();
        for (size_t f = 0; f < dim; ++f)
            if (has_interior_point(lo[f], hi[f])) eligible.push_back(static_cast<int32_t>(f));
        if (eligible.empty()) {
            nodes[id].size = static_cast<int64_t>(count);
            return id;
        }

        const int32_t feature = eligible[rng.uniform_index(eligible.size())];
        const double split = draw_split_value(rng, lo[feature], hi[feature]);

        auto mid_it = std::partition(rows.begin() + static_cast<ptrdiff_t>(begin),
                                     rows.begin() + static_cast<ptrdiff_t>(end),
                                     [&](size_t r) { return data.row(r)[feature] < split; });
        const size_t mid = static_cast<size_t>(mid_it - rows.begin());

        nodes[id].split_feature = feature;
        nodes[id].split_value = split;
        const int32_t left = build(begin, mid, depth + 1);
        const int32_t right = build(mid, end, depth + 1);
        nodes[id].left = left;
        nodes[id].right = right;
        return id;
    }
};

std::vector<size_t> sample_without_replacement(size_t n, size_t m, Rng& rng) {
    if (m >= n) {
        std::vector<size_t> all(n);
        for (size_t i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    // Floyd's algorithm; the chosen set (not its order) is what matters.
    std::set<size_t> chosen;
    for (size_t j = n - m; j < n; ++j) {
        size_t t = rng.uniform_index(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    return std::vector<size_t>(chosen.begin(), chosen.end());
}

}  // namespace

IsolationTree build_tree(const FeatureMatrix& data, std::span<const size_t> sample_rows,
                         int height_limit, Rng& rng) {
    if (sample_rows.empty()) throw_data("cannot build a tree from an empty sample");
    if (data.dim() == 0) throw_data("cannot build a tree over zero features");

    IsolationTree tree;
    tree.sample_count = static_cast<int64_t>(sample_rows.size());
    std::vector<size_t> rows(sample_rows.begin(), sample_rows.end());

    TreeBuilder builder{data,
                        height_limit,
                        rng,
                        tree.nodes,
                        rows,
                        std::vector<double>(data.dim()),
                        std::vector<double>(data.dim()),
                        {}};
    builder.build(0, rows.size(), 0);
    return tree;
}

IsolationForestModel::IsolationForestModel(std::vector<IsolationTree> trees, ForestParams params,
                                           int64_t n_train)
    : trees_(std::move(trees)), params_(params), n_train_(n_train) {
    params_.validate();
    if (trees_.size() != static_cast<size_t>(params_.num_trees))
        throw_model("forest has " + std::to_string(trees_.size()) + " trees, params say " +
                    std::to_string(params_.num_trees));
    dim_ = 0;
    for (const auto& t : trees_)
        for (const auto& n : t.nodes)
            if (!n.is_external())
                dim_ = std::max(dim_, static_cast<size_t>(n.split_feature) + 1);
    finish_init();
}

IsolationForestModel IsolationForestModel::fit(const FeatureMatrix& data,
                                               const ForestParams& params, int threads) {
    params.validate();
    if (data.rows() < 2)
        throw_data("insufficient data: isolation forest needs at least 2 rows, got " +
                   std::to_string(data.rows()));

    IsolationForestModel model;
    model.params_ = params;
    model.n_train_ = static_cast<int64_t>(data.rows());
    model.dim_ = data.dim();

    const size_t sample_size =
        std::min(static_cast<size_t>(params.subsample_size), data.rows());
    const int height_limit = params.effective_height_limit();

    model.trees_.resize(static_cast<size_t>(params.num_trees));
    parallel_for(0, model.trees_.size(), threads, [&](size_t i) {
        Rng rng = Rng::derive(params.seed, i);
        auto sample = sample_without_replacement(data.rows(), sample_size, rng);
        model.trees_[i] = build_tree(data, sample, height_limit, rng);
    });

    model.finish_init();
    return model;
}

void IsolationForestModel::finish_init() {
    c_norm_ = avg_path_length_c(effective_sample_size());
}

int64_t IsolationForestModel::effective_sample_size() const {
    return std::min(static_cast<int64_t>(params_.subsample_size), n_train_);
}

double IsolationForestModel::mean_path_length(std::span<const double> x) const {
    if (!fitted()) throw_model("isolation forest model is not fitted");
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.path_length(x);
    return sum / static_cast<double>(trees_.size());
}

double IsolationForestModel::anomaly_score(std::span<const double> x) const {
    const double mean = mean_path_length(x);
    return std::exp2(-mean / c_norm_);
}

std::vector<double> IsolationForestModel::score_batch(const FeatureMatrix& data,
                                                      int threads) const {
    if (!fitted()) throw_model("isolation forest model is not fitted");
    std::vector<double> scores(data.rows());
    parallel_for(0, data.rows(), threads, [&](size_t i) { scores[i] = anomaly_score(data.row(i)); });
    return scores;
}

}  // namespace isoguard
