#include "stream.hpp"

#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>

#include "parallel.hpp"

namespace isoguard {

namespace {
constexpr size_t kUnitBuckets = 1000;  // 1 us resolution below 1 ms
constexpr size_t kDoublingBuckets = 24;
}  // namespace

LatencyHistogram::LatencyHistogram() : counts_(kUnitBuckets + kDoublingBuckets, 0) {}

size_t LatencyHistogram::bucket_index(uint64_t us) {
    if (us < kUnitBuckets) return static_cast<size_t>(us);
    uint64_t edge = kUnitBuckets;
    for (size_t i = 0; i < kDoublingBuckets - 1; ++i) {
        edge *= 2;
        if (us < edge) return kUnitBuckets + i;
    }
    return kUnitBuckets + kDoublingBuckets - 1;
}

uint64_t LatencyHistogram::bucket_lower_edge(size_t index) {
    if (index < kUnitBuckets) return index;
    return kUnitBuckets << (index - kUnitBuckets);
}

void LatencyHistogram::add(uint64_t microseconds) {
    ++counts_[bucket_index(microseconds)];
    ++count_;
    sum_us_ += static_cast<double>(microseconds);
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
    for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    count_ += other.count_;
    sum_us_ += other.sum_us_;
}

double LatencyHistogram::mean_us() const {
    return count_ == 0 ? 0.0 : sum_us_ / static_cast<double>(count_);
}

double LatencyHistogram::percentile_us(double q) const {
    if (count_ == 0) return 0.0;
    const uint64_t target =
        std::max<uint64_t>(1, static_cast<uint64_t>(std::ceil(q * static_cast<double>(count_))));
    uint64_t cumulative = 0;
    for (size_t i = 0; i < counts_.size(); ++i) {
        cumulative += counts_[i];
        if (cumulative >= target) return static_cast<double>(bucket_lower_edge(i));
    }
    return static_cast<double>(bucket_lower_edge(counts_.size() - 1));
}

nlohmann::json LatencyHistogram::to_json() const {
    nlohmann::json buckets = nlohmann::json::array();
    for (size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] == 0) continue;
        buckets.push_back({{"lower_us", bucket_lower_edge(i)}, {"count", counts_[i]}});
    }
    return {{"mean_us", mean_us()},
            {"p50_us", percentile_us(0.50)},
            {"p95_us", percentile_us(0.95)},
            {"p99_us", percentile_us(0.99)},
            {"buckets", std::move(buckets)}};
}

nlohmann::json StreamStats::to_json() const {
    return {{"records_seen", records_seen},
            {"records_scored", records_scored},
            {"records_dead_lettered", records_dead_lettered},
            {"throughput_rps", throughput_rps()},
            {"wall_seconds", wall_seconds},
            {"latency", latency.to_json()}};
}

namespace {

using Clock = std::chrono::steady_clock;

struct ScoredLine {
    bool ok = false;
    double score = 0.0;
    Label label = Label::Normal;
    std::string error;
    uint64_t latency_us = 0;
};

ScoredLine process_line(const std::string& line, const ModelBundle& bundle) {
    ScoredLine out;
    const auto start = Clock::now();
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
        out.error = "malformed json record";
        return out;
    }
    try {
        auto vec = bundle.schema.transform_json(record);
        out.score = bundle.forest.anomaly_score(vec);
        out.label = bundle.label_score(out.score);
        out.ok = true;
    } catch (const Error& e) {
        out.error = e.what();
    }
    out.latency_us = static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count());
    return out;
}

void emit(std::ostream& sink, uint64_t id, const ScoredLine& scored) {
    // Fixed, byte-stable line shape; score with full round-trip precision.
    char buf[352];
    std::snprintf(buf, sizeof(buf),
                  "{\"id\":%llu,\"score\":%.17g,\"label\":\"%s\",\"latency_us\":%llu}",
                  static_cast<unsigned long long>(id), scored.score,
                  scored.label == Label::Anomaly ? "anomaly" : "normal",
                  static_cast<unsigned long long>(scored.latency_us));
    sink << buf << '\n';
    if (!sink) throw_io("stream sink write failure");
}

}  // namespace

StreamStats stream_score(std::istream& source, const BundleHandle& handle, std::ostream& sink,
                         DeadLetterSink* dead_letter, const StreamOptions& options) {
    StreamStats stats;
    const auto wall_start = Clock::now();

    auto flush_stats = [&](bool final_flush) {
        stats.wall_seconds =
            std::chrono::duration<double>(Clock::now() - wall_start).count();
        if (options.stats_out && (final_flush || options.flush_every > 0)) {
            *options.stats_out << stats.to_json().dump() << '\n';
            options.stats_out->flush();
        }
    };

    auto account = [&](uint64_t id, const std::string& line, const ScoredLine& scored) {
        if (scored.ok) {
            emit(sink, id, scored);
            ++stats.records_scored;
            stats.latency.add(scored.latency_us);
        } else {
            if (options.fail_fast) throw_data("record " + std::to_string(id) + ": " + scored.error);
            ++stats.records_dead_lettered;
            if (dead_letter) dead_letter->write(line, scored.error);
        }
        if (options.flush_every > 0 && stats.records_seen % static_cast<uint64_t>(options.flush_every) == 0)
            flush_stats(false);
    };

    std::string line;
    if (options.threads <= 1) {
        while (std::getline(source, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const uint64_t id = stats.records_seen++;
            auto bundle = handle.get();
            if (!bundle) throw_model("stream has no active model bundle");
            account(id, line, process_line(line, *bundle));
        }
    } else {
        // Sharded mode: a chunk of lines is scored in parallel, then written
        // in input order.
        const size_t chunk_target = static_cast<size_t>(options.threads) * 256;
        std::vector<std::string> chunk;
        std::vector<ScoredLine> results;
        auto drain = [&]() {
            if (chunk.empty()) return;
            auto bundle = handle.get();
            if (!bundle) throw_model("stream has no active model bundle");
            results.assign(chunk.size(), {});
            parallel_for(0, chunk.size(), options.threads,
                         [&](size_t i) { results[i] = process_line(chunk[i], *bundle); });
            for (size_t i = 0; i < chunk.size(); ++i) {
                const uint64_t id = stats.records_seen++;
                account(id, chunk[i], results[i]);
            }
            chunk.clear();
        };
        while (std::getline(source, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            chunk.push_back(line);
            if (chunk.size() >= chunk_target) drain();
        }
        drain();
    }
    if (source.bad()) throw_io("stream source read failure");

    sink.flush();
    flush_stats(true);
    return stats;
}

}  // namespace isoguard
