#pragma once

#include <iosfwd>
#include <memory>
#include <mutex>

#include "pipeline.hpp"

namespace isoguard {

// Swappable reference to the active model. Streams read through the handle,
// so a freshly retrained bundle can replace the online one between records
// without stopping the pipeline.
class BundleHandle {
public:
    BundleHandle() = default;
    explicit BundleHandle(std::shared_ptr<const ModelBundle> bundle) { set(std::move(bundle)); }

    void set(std::shared_ptr<const ModelBundle> bundle) {
        std::lock_guard<std::mutex> lock(mutex_);
        bundle_ = std::move(bundle);
    }
    std::shared_ptr<const ModelBundle> get() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return bundle_;
    }

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const ModelBundle> bundle_;
};

// Fixed-layout microsecond histogram: unit buckets below 1 ms, then doubling
// bucket widths. Percentiles report the lower edge of the covering bucket.
class LatencyHistogram {
public:
    LatencyHistogram();

    void add(uint64_t microseconds);
    void merge(const LatencyHistogram& other);

    uint64_t count() const { return count_; }
    double mean_us() const;
    double percentile_us(double q) const;  // q in [0, 1]

    nlohmann::json to_json() const;  // non-empty buckets only

private:
    std::vector<uint64_t> counts_;
    uint64_t count_ = 0;
    double sum_us_ = 0.0;

    static size_t bucket_index(uint64_t us);
    static uint64_t bucket_lower_edge(size_t index);
};

struct StreamStats {
    uint64_t records_seen = 0;
    uint64_t records_scored = 0;
    uint64_t records_dead_lettered = 0;
    LatencyHistogram latency;
    double wall_seconds = 0.0;

    double throughput_rps() const {
        return wall_seconds > 0.0 ? static_cast<double>(records_scored) / wall_seconds : 0.0;
    }
    nlohmann::json to_json() const;
};

struct StreamOptions {
    int flush_every = 0;        // stats flush period in records; 0 = end of stream only
    int threads = 1;            // > 1: records are sharded and re-sequenced at the sink
    bool fail_fast = false;     // malformed/unencodable records abort instead of dead-letter
    std::ostream* stats_out = nullptr;  // periodic + final stats as one JSON document per line
};

// Scores newline-delimited JSON records one at a time: transform -> score ->
// label -> sink line {"id", "score", "label", "latency_us"}. Sink order equals
// source order. Encoding failures go to the dead-letter sink and the stream
// keeps going; a sink write failure halts with partial stats.
StreamStats stream_score(std::istream& source, const BundleHandle& handle, std::ostream& sink,
                         DeadLetterSink* dead_letter = nullptr, const StreamOptions& options = {});

}  // namespace isoguard
