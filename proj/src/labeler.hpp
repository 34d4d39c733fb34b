#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dataio.hpp"

namespace isoguard {

struct KMeansParams {
    int k = 2;
    uint64_t seed = 1;
    int max_iter = 100;
    double tol = 1e-9;  // centroid movement; scores live in (0, 1]
    int restarts = 1;   // best-of-n by within-cluster sum of squares
};

// 1-D K-Means over anomaly scores. The majority cluster is normal; everything
// else labels anomaly. Takes neither a contamination ratio nor a quantile
// relative error.
class KMeansLabelerModel {
public:
    KMeansLabelerModel() = default;

    // k-means++ style seeding, Lloyd iterations until the largest centroid
    // movement is <= tol or max_iter is hit. Errors when the input has fewer
    // distinct values than k (callers should label everything normal then).
    static KMeansLabelerModel fit(std::span<const double> scores, const KMeansParams& params = {});

    // Restores a fitted model (persistence path).
    KMeansLabelerModel(std::vector<double> centroids, int normal_cluster, KMeansParams params);

    bool fitted() const { return !centroids_.empty(); }
    const std::vector<double>& centroids() const { return centroids_; }  // sorted ascending
    int normal_cluster() const { return normal_cluster_; }
    const KMeansParams& params() const { return params_; }

    // Nearest centroid, ties to the lower index.
    size_t assign(double score) const;
    Label label_one(double score) const;
    std::vector<Label> label(std::span<const double> scores) const;

private:
    std::vector<double> centroids_;
    int normal_cluster_ = 0;
    KMeansParams params_;
};

// Quantile-threshold baseline: anomaly iff score >= threshold, where the
// threshold is the (1 - contamination) quantile of training scores computed
// by the rank-error sketch.
class QuantileLabelerModel {
public:
    QuantileLabelerModel() = default;

    static QuantileLabelerModel fit(std::span<const double> scores, double contamination,
                                    double relative_error);

    // Restores a fitted model (persistence path).
    QuantileLabelerModel(double threshold, double contamination, double relative_error);

    bool fitted() const { return fitted_; }
    double threshold() const { return threshold_; }
    double contamination() const { return contamination_; }
    double relative_error() const { return relative_error_; }

    Label label_one(double score) const {
        return score >= threshold_ ? Label::Anomaly : Label::Normal;
    }
    std::vector<Label> label(std::span<const double> scores) const;

private:
    double threshold_ = 0.0;
    double contamination_ = 0.0;
    double relative_error_ = 0.0;
    bool fitted_ = false;
};

}  // namespace isoguard
