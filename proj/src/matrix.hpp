#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"

namespace isoguard {

// Dense row-major matrix of encoded feature values. Rows all share one
// dimension; that is the only schema the tree code ever sees.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(size_t dim) : dim_(dim) {}

    void reserve_rows(size_t rows) { data_.reserve(rows * dim_); }

    void append_row(std::span<const double> row) {
        if (dim_ == 0 && data_.empty()) dim_ = row.size();
        if (row.size() != dim_)
            throw_data("feature vector dimension mismatch: expected " + std::to_string(dim_) +
                       ", got " + std::to_string(row.size()));
        data_.insert(data_.end(), row.begin(), row.end());
    }

    size_t rows() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
    size_t dim() const { return dim_; }

    std::span<const double> row(size_t i) const { return {data_.data() + i * dim_, dim_}; }

private:
    size_t dim_ = 0;
    std::vector<double> data_;
};

}  // namespace isoguard
