#include "labeler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "quantile_sketch.hpp"
#include "rng.hpp"

namespace isoguard {

namespace {

struct LloydResult {
    std::vector<double> centroids;  // sorted ascending
    std::vector<int64_t> sizes;
    double wcss = std::numeric_limits<double>::infinity();
};

std::vector<double> seed_centroids(std::span<const double> points, int k, Rng& rng) {
    std::vector<double> centroids;
    centroids.reserve(static_cast<size_t>(k));
    centroids.push_back(points[rng.uniform_index(points.size())]);

    std::vector<double> dist2(points.size());
    while (centroids.size() < static_cast<size_t>(k)) {
        double total = 0.0;
        for (size_t i = 0; i < points.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centroids) {
                const double d = points[i] - c;
                best = std::min(best, d * d);
            }
            dist2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // All remaining mass sits on existing centroids; distinct-count
            // preconditions make this unreachable, but stay safe.
            centroids.push_back(points[rng.uniform_index(points.size())]);
            continue;
        }
        double pick = rng.uniform01() * total;
        size_t chosen = points.size() - 1;
        for (size_t i = 0; i < points.size(); ++i) {
            pick -= dist2[i];
            if (pick <= 0.0) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points[chosen]);
    }
    std::sort(centroids.begin(), centroids.end());
    return centroids;
}

size_t nearest(std::span<const double> centroids, double x) {
    size_t best = 0;
    double best_d = std::abs(x - centroids[0]);
    for (size_t j = 1; j < centroids.size(); ++j) {
        const double d = std::abs(x - centroids[j]);
        if (d < best_d) {  // ties keep the lower index
            best_d = d;
            best = j;
        }
    }
    return best;
}

LloydResult lloyd(std::span<const double> points, int k, const KMeansParams& params, Rng& rng) {
    LloydResult result;
    result.centroids = seed_centroids(points, k, rng);
    result.sizes.assign(static_cast<size_t>(k), 0);

    std::vector<double> sums(static_cast<size_t>(k));
    for (int iter = 0; iter < params.max_iter; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(result.sizes.begin(), result.sizes.end(), 0);
        for (double x : points) {
            const size_t j = nearest(result.centroids, x);
            sums[j] += x;
            ++result.sizes[j];
        }

        std::vector<double> updated = result.centroids;
        for (size_t j = 0; j < updated.size(); ++j) {
            if (result.sizes[j] > 0) {
                updated[j] = sums[j] / static_cast<double>(result.sizes[j]);
            } else {
                // Empty cluster: restart it at the point farthest from its
                // current centroid.
                double far_point = points[0];
                double far_d = -1.0;
                for (double x : points) {
                    const double d = std::abs(x - result.centroids[j]);
                    if (d > far_d) {
                        far_d = d;
                        far_point = x;
                    }
                }
                updated[j] = far_point;
            }
        }
        std::sort(updated.begin(), updated.end());

        double movement = 0.0;
        for (size_t j = 0; j < updated.size(); ++j)
            movement = std::max(movement, std::abs(updated[j] - result.centroids[j]));
        result.centroids = std::move(updated);
        if (movement <= params.tol) break;
    }

    // Final assignment under the converged centroids.
    std::fill(result.sizes.begin(), result.sizes.end(), 0);
    result.wcss = 0.0;
    for (double x : points) {
        const size_t j = nearest(result.centroids, x);
        ++result.sizes[j];
        const double d = x - result.centroids[j];
        result.wcss += d * d;
    }
    return result;
}

}  // namespace

KMeansLabelerModel KMeansLabelerModel::fit(std::span<const double> scores,
                                           const KMeansParams& params) {
    if (scores.empty()) throw_data("kmeans_fit: score list is empty");
    if (params.k < 1) throw_usage("k must be >= 1");
    if (params.max_iter < 1) throw_usage("max_iter must be >= 1");
    if (params.restarts < 1) throw_usage("restarts must be >= 1");

    std::set<double> distinct(scores.begin(), scores.end());
    if (distinct.size() < static_cast<size_t>(params.k))
        throw_data("degenerate input: " + std::to_string(distinct.size()) +
                   " distinct score value(s) for k = " + std::to_string(params.k) +
                   "; label everything normal instead");

    LloydResult best;
    for (int r = 0; r < params.restarts; ++r) {
        Rng rng = Rng::derive(params.seed, static_cast<uint64_t>(r));
        LloydResult candidate = lloyd(scores, params.k, params, rng);
        if (candidate.wcss < best.wcss) best = std::move(candidate);
    }

    // Majority cluster is normal; ties go to the lower centroid (lower score
    // means closer to normal).
    int normal = 0;
    for (size_t j = 1; j < best.sizes.size(); ++j)
        if (best.sizes[j] > best.sizes[static_cast<size_t>(normal)]) normal = static_cast<int>(j);

    KMeansLabelerModel model;
    model.centroids_ = std::move(best.centroids);
    model.normal_cluster_ = normal;
    model.params_ = params;
    return model;
}

KMeansLabelerModel::KMeansLabelerModel(std::vector<double> centroids, int normal_cluster,
                                       KMeansParams params)
    : centroids_(std::move(centroids)), normal_cluster_(normal_cluster), params_(params) {
    if (centroids_.empty()) throw_model("kmeans labeler has no centroids");
    if (!std::is_sorted(centroids_.begin(), centroids_.end()))
        throw_model("kmeans labeler centroids must be sorted ascending");
    if (normal_cluster_ < 0 || static_cast<size_t>(normal_cluster_) >= centroids_.size())
        throw_model("kmeans labeler normal_cluster out of range");
}

size_t KMeansLabelerModel::assign(double score) const { return nearest(centroids_, score); }

Label KMeansLabelerModel::label_one(double score) const {
    if (!fitted()) throw_model("kmeans labeler is not fitted");
    return assign(score) == static_cast<size_t>(normal_cluster_) ? Label::Normal : Label::Anomaly;
}

std::vector<Label> KMeansLabelerModel::label(std::span<const double> scores) const {
    if (!fitted()) throw_model("kmeans labeler is not fitted");
    std::vector<Label> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back(label_one(s));
    return out;
}

QuantileLabelerModel QuantileLabelerModel::fit(std::span<const double> scores,
                                               double contamination, double relative_error) {
    if (!(contamination > 0.0 && contamination < 1.0))
        throw_usage("contamination must be in (0, 1)");
    const double threshold = approx_quantile(scores, 1.0 - contamination, relative_error);
    return QuantileLabelerModel(threshold, contamination, relative_error);
}

QuantileLabelerModel::QuantileLabelerModel(double threshold, double contamination,
                                           double relative_error)
    : threshold_(threshold),
      contamination_(contamination),
      relative_error_(relative_error),
      fitted_(true) {}

std::vector<Label> QuantileLabelerModel::label(std::span<const double> scores) const {
    if (!fitted()) throw_model("quantile labeler is not fitted");
    std::vector<Label> out;
    out.reserve(scores.size());
    for (double s : scores) out.push_back(label_one(s));
    return out;
}

}  // namespace isoguard
