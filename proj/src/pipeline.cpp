#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "parallel.hpp"

namespace isoguard {

ModelBundle train_pipeline(const FeatureOnlyView& data, const TrainConfig& config) {
    config.forest.validate();
    if (data.rows() < 2)
        throw_data("insufficient data: training needs at least 2 rows, got " +
                   std::to_string(data.rows()));

    ModelBundle bundle;
    bundle.schema = FeatureSchema::fit(config.schema, data);
    FeatureMatrix encoded = bundle.schema.transform_all(data);
    bundle.forest = IsolationForestModel::fit(encoded, config.forest, config.threads);

    std::vector<double> train_scores = bundle.forest.score_batch(encoded, config.threads);
    if (config.labeler.kind == LabelerKind::KMeans) {
        bundle.labeler = KMeansLabelerModel::fit(train_scores, config.labeler.kmeans);
    } else {
        bundle.labeler = QuantileLabelerModel::fit(train_scores, config.labeler.contamination,
                                                   config.labeler.relative_error);
    }

    bundle.created_at = now_rfc3339_utc();
    std::string canonical = bundle.schema.fitted() ? config.schema.to_json().dump() : "";
    canonical += "|trees=" + std::to_string(config.forest.num_trees);
    canonical += "|subsample=" + std::to_string(config.forest.subsample_size);
    canonical += "|height=" + std::to_string(config.forest.height_limit);
    canonical += "|seed=" + std::to_string(config.forest.seed);
    canonical += config.labeler.kind == LabelerKind::KMeans
                     ? "|labeler=kmeans,k=" + std::to_string(config.labeler.kmeans.k)
                     : "|labeler=quantile,cr=" + std::to_string(config.labeler.contamination) +
                           ",eps=" + std::to_string(config.labeler.relative_error);
    canonical += "|n=" + std::to_string(data.rows());
    canonical += "|source=" + data.source();
    bundle.train_fingerprint = fingerprint_hex(canonical);
    return bundle;
}

BatchScores score_dataset(const ModelBundle& bundle, const FeatureOnlyView& data,
                          RowErrorPolicy policy, int threads) {
    if (!bundle.forest.fitted()) throw_model("model is not fitted");
    BatchScores out;
    out.scores.assign(data.rows(), std::nan(""));
    auto binding = bundle.schema.bind(data.columns());

    std::mutex errors_mutex;
    parallel_for(0, data.rows(), threads, [&](size_t r) {
        try {
            auto vec = bundle.schema.transform_row(data, r, binding);
            out.scores[r] = bundle.forest.anomaly_score(vec);
        } catch (const Error& e) {
            if (policy == RowErrorPolicy::FailFast) throw;
            std::lock_guard<std::mutex> lock(errors_mutex);
            out.errors.push_back({r, e.what()});
        }
    });
    std::sort(out.errors.begin(), out.errors.end(),
              [](const RowError& a, const RowError& b) { return a.row < b.row; });
    return out;
}

void label_batch(const ModelBundle& bundle, BatchScores& batch) {
    batch.labels.assign(batch.scores.size(), std::nullopt);
    for (size_t i = 0; i < batch.scores.size(); ++i) {
        if (!std::isnan(batch.scores[i])) batch.labels[i] = bundle.label_score(batch.scores[i]);
    }
}

}  // namespace isoguard
