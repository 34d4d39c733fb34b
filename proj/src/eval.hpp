#pragma once

#include <span>
#include <string>
#include <vector>

#include "pipeline.hpp"

#include <json.hpp>

namespace isoguard {

// Probability that a random anomaly outranks a random normal; tied values
// count one half (Mann-Whitney form). Errors when truth has a single class.
double auc(std::span<const Label> truth, std::span<const double> values);

struct Confusion {
    int64_t tp = 0, fp = 0, tn = 0, fn = 0;  // positive class = anomaly
    int64_t total() const { return tp + fp + tn + fn; }
};

Confusion confusion_counts(std::span<const Label> truth, std::span<const Label> predicted);

struct EvalReport {
    std::string dataset;
    uint64_t seed = 0;
    double auc_scores = 0.0;  // AUC of raw anomaly scores vs truth
    double auc_labels = 0.0;  // AUC of binary predictions vs truth
    Confusion confusion;
    nlohmann::json params;

    nlohmann::json to_json() const;
};

enum class Method { IForestKMeans, IForestQuantile };

const char* method_name(Method m);

struct BenchmarkResult {
    std::string dataset;
    Method method = Method::IForestKMeans;
    std::vector<EvalReport> per_seed;
    double mean_auc_labels = 0.0, stddev_auc_labels = 0.0;
    double mean_auc_scores = 0.0, stddev_auc_scores = 0.0;

    nlohmann::json to_json() const;
    // Delimited table: seed,auc_scores,auc_labels,tp,fp,tn,fn + a mean/stddev block.
    std::string to_table() const;
};

// Fit-on-all-then-score-all protocol: for each seed, fit the pipeline on the
// label-stripped view, score and label every row, and compare against truth.
BenchmarkResult run_benchmark(const Dataset& data, Method method, const ForestParams& forest,
                              const LabelerConfig& labeler, std::span<const uint64_t> seeds,
                              int threads = 1);

enum class SweepParam { Contamination, RelativeError };

struct SweepPoint {
    double value = 0.0;
    BenchmarkResult result;
};

// Sensitivity sweep with the quantile labeler. Forests are fitted once per
// seed and reused across grid values: the labeler parameter cannot change the
// raw scores, only the threshold.
std::vector<SweepPoint> run_sweep(const Dataset& data, SweepParam param,
                                  std::span<const double> grid, const ForestParams& forest,
                                  const LabelerConfig& base, std::span<const uint64_t> seeds,
                                  int threads = 1);

// Plot-ready delimited table: value,auc_labels,auc_scores.
std::string sweep_table(std::span<const SweepPoint> points);

std::vector<uint64_t> default_seeds();  // {1..10}

}  // namespace isoguard
