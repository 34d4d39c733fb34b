#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace isoguard {

double auc(std::span<const Label> truth, std::span<const double> values) {
    if (truth.size() != values.size())
        throw_usage("auc: truth and value lengths differ (" + std::to_string(truth.size()) +
                    " vs " + std::to_string(values.size()) + ")");
    if (truth.empty()) throw_data("auc: empty input");

    const size_t n = truth.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });

    // Average ranks over tie groups, then the Mann-Whitney U statistic.
    double positive_rank_sum = 0.0;
    int64_t positives = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k) {
            if (truth[order[k]] == Label::Anomaly) {
                positive_rank_sum += avg_rank;
                ++positives;
            }
        }
        i = j;
    }

    const int64_t negatives = static_cast<int64_t>(n) - positives;
    if (positives == 0 || negatives == 0)
        throw_data("auc is undefined: truth contains a single class");

    const double u = positive_rank_sum -
                     static_cast<double>(positives) * (static_cast<double>(positives) + 1.0) / 2.0;
    return u / (static_cast<double>(positives) * static_cast<double>(negatives));
}

Confusion confusion_counts(std::span<const Label> truth, std::span<const Label> predicted) {
    if (truth.size() != predicted.size()) throw_usage("confusion: length mismatch");
    Confusion c;
    for (size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] == Label::Anomaly;
        const bool p = predicted[i] == Label::Anomaly;
        if (t && p) ++c.tp;
        else if (!t && p) ++c.fp;
        else if (!t && !p) ++c.tn;
        else ++c.fn;
    }
    return c;
}

nlohmann::json EvalReport::to_json() const {
    return {{"dataset", dataset},
            {"seed", seed},
            {"auc_scores", auc_scores},
            {"auc_labels", auc_labels},
            {"confusion", {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn},
                           {"fn", confusion.fn}}},
            {"params", params}};
}

const char* method_name(Method m) {
    return m == Method::IForestKMeans ? "iforest-kmeans" : "iforest-quantile";
}

namespace {

void mean_stddev(std::span<const double> xs, double& mean, double& stddev) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
    stddev = std::sqrt(var);
}

void finalize(BenchmarkResult& r) {
    std::vector<double> labels_auc, scores_auc;
    for (const auto& rep : r.per_seed) {
        labels_auc.push_back(rep.auc_labels);
        scores_auc.push_back(rep.auc_scores);
    }
    mean_stddev(labels_auc, r.mean_auc_labels, r.stddev_auc_labels);
    mean_stddev(scores_auc, r.mean_auc_scores, r.stddev_auc_scores);
}

nlohmann::json params_json(const ForestParams& forest, const LabelerConfig& labeler) {
    nlohmann::json out = {{"trees", forest.num_trees},
                          {"subsample", forest.subsample_size},
                          {"height_limit", forest.height_limit}};
    if (labeler.kind == LabelerKind::KMeans) {
        out["labeler"] = "kmeans";
        out["k"] = labeler.kmeans.k;
    } else {
        out["labeler"] = "quantile";
        out["contamination"] = labeler.contamination;
        out["relative_error"] = labeler.relative_error;
    }
    return out;
}

}  // namespace

nlohmann::json BenchmarkResult::to_json() const {
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& rep : per_seed) seeds.push_back(rep.to_json());
    return {{"dataset", dataset},
            {"method", method_name(method)},
            {"mean_auc_labels", mean_auc_labels},
            {"stddev_auc_labels", stddev_auc_labels},
            {"mean_auc_scores", mean_auc_scores},
            {"stddev_auc_scores", stddev_auc_scores},
            {"runs", std::move(seeds)}};
}

std::string BenchmarkResult::to_table() const {
    std::ostringstream out;
    out.precision(6);
    out << "seed,auc_scores,auc_labels,tp,fp,tn,fn\n";
    for (const auto& rep : per_seed) {
        out << rep.seed << ',' << rep.auc_scores << ',' << rep.auc_labels << ','
            << rep.confusion.tp << ',' << rep.confusion.fp << ',' << rep.confusion.tn << ','
            << rep.confusion.fn << '\n';
    }
    out << "mean,," << mean_auc_labels << ",,,,\n";
    out << "stddev,," << stddev_auc_labels << ",,,,\n";
    return out.str();
}

BenchmarkResult run_benchmark(const Dataset& data, Method method, const ForestParams& forest,
                              const LabelerConfig& labeler, std::span<const uint64_t> seeds,
                              int threads) {
    if (!data.has_labels())
        throw_data("benchmark needs ground-truth labels; dataset '" + data.source() +
                   "' has none");
    if (seeds.empty()) throw_usage("benchmark needs at least one seed");

    LabelerConfig effective = labeler;
    effective.kind = method == Method::IForestKMeans ? LabelerKind::KMeans : LabelerKind::Quantile;

    BenchmarkResult result;
    result.dataset = data.source();
    result.method = method;

    const auto& truth = data.labels();
    for (uint64_t seed : seeds) {
        TrainConfig cfg;
        cfg.forest = forest;
        cfg.forest.seed = seed;
        cfg.labeler = effective;
        cfg.labeler.kmeans.seed = seed;
        cfg.threads = threads;

        ModelBundle bundle = train_pipeline(data.features_only(), cfg);
        BatchScores batch = score_dataset(bundle, data.features_only(),
                                          RowErrorPolicy::FailFast, threads);
        label_batch(bundle, batch);

        std::vector<Label> predicted(batch.scores.size());
        std::vector<double> predicted_values(batch.scores.size());
        for (size_t i = 0; i < batch.scores.size(); ++i) {
            predicted[i] = *batch.labels[i];
            predicted_values[i] = predicted[i] == Label::Anomaly ? 1.0 : 0.0;
        }

        EvalReport report;
        report.dataset = data.source();
        report.seed = seed;
        report.auc_scores = auc(truth, batch.scores);
        report.auc_labels = auc(truth, predicted_values);
        report.confusion = confusion_counts(truth, predicted);
        report.params = params_json(cfg.forest, cfg.labeler);
        result.per_seed.push_back(std::move(report));
    }
    finalize(result);
    return result;
}

std::vector<SweepPoint> run_sweep(const Dataset& data, SweepParam param,
                                  std::span<const double> grid, const ForestParams& forest,
                                  const LabelerConfig& base, std::span<const uint64_t> seeds,
                                  int threads) {
    if (grid.empty()) throw_usage("sweep grid is empty");
    if (!data.has_labels())
        throw_data("sweep needs ground-truth labels; dataset '" + data.source() + "' has none");
    for (double v : grid) {
        if (param == SweepParam::Contamination && !(v > 0.0 && v < 1.0))
            throw_usage("contamination grid value " + std::to_string(v) + " outside (0, 1)");
        if (param == SweepParam::RelativeError && !(v >= 0.0 && v <= 1.0))
            throw_usage("relative_error grid value " + std::to_string(v) + " outside [0, 1]");
    }

    // One forest fit + score pass per seed; grid values only move the
    // threshold.
    struct SeedRun {
        uint64_t seed;
        std::vector<double> scores;
    };
    std::vector<SeedRun> runs;
    for (uint64_t seed : seeds) {
        TrainConfig cfg;
        cfg.forest = forest;
        cfg.forest.seed = seed;
        cfg.labeler.kind = LabelerKind::Quantile;
        cfg.labeler.contamination = base.contamination;
        cfg.labeler.relative_error = base.relative_error;
        cfg.threads = threads;
        ModelBundle bundle = train_pipeline(data.features_only(), cfg);
        BatchScores batch =
            score_dataset(bundle, data.features_only(), RowErrorPolicy::FailFast, threads);
        runs.push_back({seed, std::move(batch.scores)});
    }

    const auto& truth = data.labels();
    std::vector<SweepPoint> points;
    for (double value : grid) {
        SweepPoint point;
        point.value = value;
        point.result.dataset = data.source();
        point.result.method = Method::IForestQuantile;
        for (const auto& run : runs) {
            const double contamination =
                param == SweepParam::Contamination ? value : base.contamination;
            const double relative_error =
                param == SweepParam::RelativeError ? value : base.relative_error;
            auto model = QuantileLabelerModel::fit(run.scores, contamination, relative_error);
            auto labels = model.label(run.scores);
            std::vector<double> label_values(labels.size());
            for (size_t i = 0; i < labels.size(); ++i)
                label_values[i] = labels[i] == Label::Anomaly ? 1.0 : 0.0;

            EvalReport report;
            report.dataset = data.source();
            report.seed = run.seed;
            report.auc_scores = auc(truth, run.scores);
            report.auc_labels = auc(truth, label_values);
            report.confusion = confusion_counts(truth, labels);
            report.params = {{"contamination", contamination},
                             {"relative_error", relative_error},
                             {"trees", forest.num_trees},
                             {"subsample", forest.subsample_size}};
            point.result.per_seed.push_back(std::move(report));
        }
        finalize(point.result);
        points.push_back(std::move(point));
    }
    return points;
}

std::string sweep_table(std::span<const SweepPoint> points) {
    std::ostringstream out;
    out.precision(6);
    out << "value,auc_labels,auc_scores\n";
    for (const auto& p : points)
        out << p.value << ',' << p.result.mean_auc_labels << ',' << p.result.mean_auc_scores
            << '\n';
    return out.str();
}

std::vector<uint64_t> default_seeds() {
    std::vector<uint64_t> seeds(10);
    std::iota(seeds.begin(), seeds.end(), 1);
    return seeds;
}

}  // namespace isoguard
