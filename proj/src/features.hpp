#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataio.hpp"
#include "matrix.hpp"

#include <json.hpp>

namespace isoguard {

enum class EncoderKind : uint8_t { Timestamp, Ip, Categorical, NumericPassthrough };

const char* encoder_kind_name(EncoderKind k);
EncoderKind encoder_kind_from_name(std::string_view name);

struct ColumnSpec {
    std::string name;
    EncoderKind kind = EncoderKind::NumericPassthrough;
};

struct SchemaConfig {
    std::vector<ColumnSpec> columns;  // empty: every dataset column is numeric passthrough
    int timezone_offset_minutes = 0;  // zone in which weekday/hour are evaluated

    static SchemaConfig from_json(const nlohmann::json& doc);
    static SchemaConfig load(const std::string& path);
    nlohmann::json to_json() const;
};

// Hour-of-week value: weekday * 24 + hour, weekday 0 = Monday. Range [0, 167].
double encode_timestamp(std::string_view ts, int timezone_offset_minutes = 0);

// Dotted-quad IPv4 to the 12-digit positional number (each octet zero-padded
// to three digits, dots removed). Injective over valid addresses; IPv6 and
// hostnames are rejected.
double encode_ip(std::string_view ip);

// Frequency-descending vocabulary over lowercased values; ties broken
// lexicographically. Index 0 is the most frequent value.
std::map<std::string, size_t> fit_categorical(std::span<const std::string_view> column_values);

// Fitted, immutable encoding pipeline. Column order is fixed at fit time and
// identical at transform time. Unseen categorical values map to the reserved
// out-of-vocabulary index V (the vocab size) and bump a shared counter so
// streaming never halts on a novel value.
class FeatureSchema {
public:
    FeatureSchema() = default;

    static FeatureSchema fit(const SchemaConfig& config, const FeatureOnlyView& data);

    // Restores a previously fitted schema (persistence path).
    FeatureSchema(std::vector<ColumnSpec> columns,
                  std::vector<std::map<std::string, size_t>> vocabs,
                  int timezone_offset_minutes);

    FeatureSchema(const FeatureSchema& o)
        : columns_(o.columns_),
          vocabs_(o.vocabs_),
          tz_offset_minutes_(o.tz_offset_minutes_),
          fitted_(o.fitted_),
          oov_count_(o.oov_count_.load()) {}
    FeatureSchema& operator=(const FeatureSchema& o) {
        columns_ = o.columns_;
        vocabs_ = o.vocabs_;
        tz_offset_minutes_ = o.tz_offset_minutes_;
        fitted_ = o.fitted_;
        oov_count_.store(o.oov_count_.load());
        return *this;
    }
    FeatureSchema(FeatureSchema&& o) noexcept
        : columns_(std::move(o.columns_)),
          vocabs_(std::move(o.vocabs_)),
          tz_offset_minutes_(o.tz_offset_minutes_),
          fitted_(o.fitted_),
          oov_count_(o.oov_count_.load()) {}
    FeatureSchema& operator=(FeatureSchema&& o) noexcept {
        columns_ = std::move(o.columns_);
        vocabs_ = std::move(o.vocabs_);
        tz_offset_minutes_ = o.tz_offset_minutes_;
        fitted_ = o.fitted_;
        oov_count_.store(o.oov_count_.load());
        return *this;
    }

    bool fitted() const { return fitted_; }
    size_t dim() const { return columns_.size(); }
    const std::vector<ColumnSpec>& columns() const { return columns_; }
    const std::map<std::string, size_t>& vocab(size_t column) const { return vocabs_[column]; }
    int timezone_offset_minutes() const { return tz_offset_minutes_; }
    uint64_t oov_count() const { return oov_count_.load(); }

    // Resolves schema columns against a dataset header once; transform then
    // runs per row without name lookups.
    std::vector<size_t> bind(const std::vector<std::string>& dataset_columns) const;

    std::vector<double> transform_row(const FeatureOnlyView& data, size_t row,
                                      std::span<const size_t> binding) const;

    // Transform for a JSON record (streaming path). Missing column -> schema
    // error; JSON numbers are accepted for numeric columns.
    std::vector<double> transform_json(const nlohmann::json& record) const;

    FeatureMatrix transform_all(const FeatureOnlyView& data) const;

    double encode_value(size_t column, std::string_view raw) const;

private:
    std::vector<ColumnSpec> columns_;
    std::vector<std::map<std::string, size_t>> vocabs_;  // empty map for non-categorical columns
    int tz_offset_minutes_ = 0;
    bool fitted_ = false;
    mutable std::atomic<uint64_t> oov_count_{0};
};

}  // namespace isoguard
