#include "quantile_sketch.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace isoguard {

QuantileSketch::QuantileSketch(double relative_error) : eps_(relative_error) {
    if (!(relative_error >= 0.0 && relative_error <= 1.0))
        throw_usage("relative_error must be in [0, 1]");
}

void QuantileSketch::insert(double value) {
    buffer_.push_back(value);
    if (buffer_.size() >= kBufferCap) flush_impl();
}

void QuantileSketch::insert(std::span<const double> values) {
    for (double v : values) insert(v);
}

void QuantileSketch::flush() const { const_cast<QuantileSketch*>(this)->flush_impl(); }

void QuantileSketch::flush_impl() {
    if (buffer_.empty()) return;
    std::sort(buffer_.begin(), buffer_.end());
    insert_sorted_batch(buffer_);
    buffer_.clear();
    compress();
}

void QuantileSketch::insert_sorted_batch(const std::vector<double>& sorted) {
    std::vector<Stat> merged;
    merged.reserve(sampled_.size() + sorted.size());

    size_t si = 0;
    int64_t n = count_;
    for (double v : sorted) {
        while (si < sampled_.size() && sampled_[si].value <= v) merged.push_back(sampled_[si++]);
        ++n;
        // A new value placed at either extreme has exact rank; interior values
        // inherit the current merge budget as uncertainty.
        int64_t delta = 0;
        if (!(merged.empty() || (si == sampled_.size()))) {
            delta = static_cast<int64_t>(std::floor(2.0 * eps_ * static_cast<double>(n))) - 1;
            if (delta < 0) delta = 0;
        }
        merged.push_back({v, 1, delta});
    }
    while (si < sampled_.size()) merged.push_back(sampled_[si++]);

    sampled_ = std::move(merged);
    count_ = n;
}

std::vector<QuantileSketch::Stat> QuantileSketch::compress_samples(std::vector<Stat> samples,
                                                                   double eps, int64_t count) {
    if (samples.size() <= 2) return samples;
    const double threshold = 2.0 * eps * static_cast<double>(count);
    std::vector<Stat> out;
    out.reserve(samples.size());
    // Right-to-left: absorb a sample into its right neighbor while the merged
    // uncertainty stays under the budget. The first and last samples stay.
    Stat head = samples.back();
    for (size_t i = samples.size() - 1; i-- > 1;) {
        const Stat& cur = samples[i];
        if (static_cast<double>(cur.g + head.g + head.delta) < threshold) {
            head.g += cur.g;
        } else {
            out.push_back(head);
            head = cur;
        }
    }
    out.push_back(head);
    out.push_back(samples.front());
    std::reverse(out.begin(), out.end());
    return out;
}

void QuantileSketch::compress() {
    if (eps_ <= 0.0) return;  // exact mode keeps everything
    sampled_ = compress_samples(std::move(sampled_), eps_, count_);
}

void QuantileSketch::merge(const QuantileSketch& other) {
    flush_impl();
    other.flush();
    if (other.count_ == 0) return;
    if (count_ == 0) {
        sampled_ = other.sampled_;
        count_ = other.count_;
        eps_ = std::max(eps_, other.eps_);
        return;
    }

    // Merge by value. A sample keeps its own uncertainty plus the worst-case
    // rank slack contributed by the other sketch around its position.
    std::vector<Stat> merged;
    merged.reserve(sampled_.size() + other.sampled_.size());
    size_t a = 0, b = 0;
    while (a < sampled_.size() && b < other.sampled_.size()) {
        const bool take_a = sampled_[a].value < other.sampled_[b].value;
        const Stat& s = take_a ? sampled_[a] : other.sampled_[b];
        const std::vector<Stat>& opposite = take_a ? other.sampled_ : sampled_;
        const size_t opp_idx = take_a ? b : a;
        int64_t extra = 0;
        if (opp_idx > 0 && opp_idx < opposite.size()) {
            const Stat& prev = opposite[opp_idx - 1];
            extra = prev.g + prev.delta - 1;
            if (extra < 0) extra = 0;
        }
        merged.push_back({s.value, s.g, s.delta + extra});
        (take_a ? a : b) += 1;
    }
    while (a < sampled_.size()) merged.push_back(sampled_[a++]);
    while (b < other.sampled_.size()) merged.push_back(other.sampled_[b++]);

    eps_ = std::max(eps_, other.eps_);
    count_ += other.count_;
    sampled_ = std::move(merged);
    compress();
}

size_t QuantileSketch::sample_count() const {
    flush();
    return sampled_.size();
}

double QuantileSketch::query(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw_usage("quantile must be in [0, 1]");
    flush();
    if (count_ == 0) throw_data("quantile of an empty value set is undefined");

    const int64_t n = count_;
    int64_t target = static_cast<int64_t>(std::ceil(q * static_cast<double>(n)));
    if (target < 1) target = 1;
    if (target > n) target = n;
    const double tolerance = eps_ * static_cast<double>(n);

    int64_t min_rank = 0;
    for (size_t i = 0; i + 1 < sampled_.size(); ++i) {
        min_rank += sampled_[i].g;
        const int64_t max_rank = min_rank + sampled_[i].delta;
        if (static_cast<double>(max_rank) - tolerance <= static_cast<double>(target) &&
            static_cast<double>(target) <= static_cast<double>(min_rank) + tolerance) {
            return sampled_[i].value;
        }
    }
    return sampled_.back().value;
}

double approx_quantile(std::span<const double> values, double q, double relative_error) {
    if (values.empty()) throw_data("approx_quantile: input is empty");
    QuantileSketch sketch(relative_error);
    sketch.insert(values);
    return sketch.query(q);
}

}  // namespace isoguard
