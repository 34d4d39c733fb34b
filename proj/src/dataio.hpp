#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

#include <json.hpp>

namespace isoguard {

enum class Label : uint8_t { Normal = 0, Anomaly = 1 };

class FeatureOnlyView;

// Ordered collection of raw (string-valued) records plus an optional
// ground-truth label per row. Cell text lives in one arena so multi-million
// row files stay cheap to hold.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<std::string> columns, std::string source);

    void append_row(const std::vector<std::string_view>& cells);
    void append_row(const std::vector<std::string>& cells);

    void set_labels(std::vector<Label> labels);

    const std::vector<std::string>& columns() const { return columns_; }
    size_t rows() const { return columns_.empty() ? 0 : offsets_.size() / columns_.size(); }
    std::string_view value(size_t row, size_t col) const;
    std::optional<size_t> column_index(std::string_view name) const;

    bool has_labels() const { return has_labels_; }
    const std::vector<Label>& labels() const;
    const std::string& source() const { return source_; }

    // Label-stripped view handed to fit paths. Training code takes this type,
    // so ground truth cannot leak into fitting by construction.
    FeatureOnlyView features_only() const;

private:
    friend class FeatureOnlyView;

    std::vector<std::string> columns_;
    std::string arena_;
    std::vector<uint64_t> offsets_;  // rows*cols entries; arena_[offsets_[k]..offsets_[k]+lengths_[k])
    std::vector<uint32_t> lengths_;
    std::vector<Label> labels_;
    bool has_labels_ = false;
    std::string source_;
};

class FeatureOnlyView {
public:
    const std::vector<std::string>& columns() const { return ds_->columns(); }
    size_t rows() const { return ds_->rows(); }
    std::string_view value(size_t row, size_t col) const { return ds_->value(row, col); }
    std::optional<size_t> column_index(std::string_view name) const { return ds_->column_index(name); }
    const std::string& source() const { return ds_->source(); }

private:
    friend class Dataset;
    explicit FeatureOnlyView(const Dataset& ds) : ds_(&ds) {}
    const Dataset* ds_;
};

struct DelimitedReadOptions {
    char delimiter = ',';
    bool has_header = true;
    std::string label_column;           // empty: no labels
    std::string positive_label = "1";   // label cell equal to this -> Anomaly
};

// Reads a delimited text file row-wise, in file order. Ragged rows and a
// missing label column are ingestion errors that carry the line number.
Dataset read_delimited(const std::string& path, const DelimitedReadOptions& options = {});

// Writes the dataset back out (header + rows, label column last when present).
void write_delimited(const Dataset& ds, const std::string& path, char delimiter = ',');

// Line-oriented destination for records that fail parsing or encoding.
// Writing never throws the stream off; failures to open are reported once.
class DeadLetterSink {
public:
    DeadLetterSink() = default;  // counting-only sink
    explicit DeadLetterSink(const std::string& path);
    ~DeadLetterSink();

    DeadLetterSink(const DeadLetterSink&) = delete;
    DeadLetterSink& operator=(const DeadLetterSink&) = delete;

    void write(std::string_view line, std::string_view reason);
    uint64_t count() const { return count_; }

private:
    std::unique_ptr<std::ofstream> out_;
    uint64_t count_ = 0;
};

// Lazy reader over newline-delimited JSON records. Malformed lines go to the
// dead-letter sink (when given) and are counted; fail_fast turns them into
// errors instead.
class NdjsonReader {
public:
    NdjsonReader(std::istream& in, DeadLetterSink* dead_letter = nullptr, bool fail_fast = false);

    // Next well-formed record, or nullopt at end of stream.
    std::optional<nlohmann::json> next();

    uint64_t lines_seen() const { return lines_seen_; }
    uint64_t records_yielded() const { return records_yielded_; }
    uint64_t dead_lettered() const { return dead_lettered_; }

private:
    std::istream* in_;
    DeadLetterSink* dead_letter_;
    bool fail_fast_;
    uint64_t lines_seen_ = 0;
    uint64_t records_yielded_ = 0;
    uint64_t dead_lettered_ = 0;
};

}  // namespace isoguard
