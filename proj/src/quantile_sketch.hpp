#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace isoguard {

// Greenwald-Khanna style rank-error quantile sketch over doubles, the same
// summary Spark uses for approxQuantile. One pass over the data, mergeable
// across shards, and every answer is an element actually inserted.
//
// Guarantee: for a query at quantile q over n values, the returned element's
// rank r satisfies |r - ceil(q * n)| <= relative_error * n. At
// relative_error = 0 the sketch never compresses and the answer is the exact
// element of rank ceil(q * n) (1-based, ascending).
class QuantileSketch {
public:
    explicit QuantileSketch(double relative_error);

    void insert(double value);
    void insert(std::span<const double> values);

    // Folds the other sketch in; the error bound of the result is the max of
    // the two bounds. Merge order does not affect the guarantee.
    void merge(const QuantileSketch& other);

    // q in [0, 1]. Errors on an empty sketch.
    double query(double q) const;

    int64_t count() const { return count_ + static_cast<int64_t>(buffer_.size()); }
    double relative_error() const { return eps_; }

    // Number of retained samples (diagnostic).
    size_t sample_count() const;

private:
    struct Stat {
        double value;
        int64_t g;      // rank gap to the previous retained sample
        int64_t delta;  // rank uncertainty at this sample
    };

    double eps_;
    std::vector<Stat> sampled_;
    std::vector<double> buffer_;
    int64_t count_ = 0;  // values represented by sampled_

    static constexpr size_t kBufferCap = 4096;

    void flush() const;  // logically const: folds pending inserts
    void flush_impl();
    void insert_sorted_batch(const std::vector<double>& sorted);
    void compress();
    static std::vector<Stat> compress_samples(std::vector<Stat> samples, double eps,
                                              int64_t count);
};

// One-shot helper: rank-ceil(q*n) element of `values` within
// relative_error * n rank tolerance.
double approx_quantile(std::span<const double> values, double q, double relative_error);

}  // namespace isoguard
