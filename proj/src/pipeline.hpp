#pragma once

#include <optional>
#include <string>
#include <vector>

#include "model_store.hpp"

namespace isoguard {

enum class LabelerKind { KMeans, Quantile };

struct LabelerConfig {
    LabelerKind kind = LabelerKind::KMeans;
    KMeansParams kmeans;
    double contamination = 0.1;   // quantile labeler only
    double relative_error = 0.0;  // quantile labeler only
};

struct TrainConfig {
    SchemaConfig schema;
    ForestParams forest;
    LabelerConfig labeler;
    int threads = 1;
};

// Fits schema -> forest -> labeler on training scores and assembles a bundle.
// Takes the label-stripped view only; ground truth never reaches fit paths.
ModelBundle train_pipeline(const FeatureOnlyView& data, const TrainConfig& config);

enum class RowErrorPolicy { FailFast, SkipAndLog };

struct RowError {
    size_t row;
    std::string message;
};

struct BatchScores {
    std::vector<double> scores;              // one entry per input row; skipped rows are NaN
    std::vector<std::optional<Label>> labels;  // empty until label_batch fills it
    std::vector<RowError> errors;
};

// Scores every row of a dataset against the bundle, in order. Per-row encoding
// failures either abort (fail-fast, default) or are reported per row and
// skipped.
BatchScores score_dataset(const ModelBundle& bundle, const FeatureOnlyView& data,
                          RowErrorPolicy policy = RowErrorPolicy::FailFast, int threads = 1);

// Applies the bundle's labeler to previously computed scores (skipped rows
// stay unlabeled).
void label_batch(const ModelBundle& bundle, BatchScores& batch);

}  // namespace isoguard
