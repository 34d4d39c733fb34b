#include "dataio.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

namespace isoguard {

Dataset::Dataset(std::vector<std::string> columns, std::string source)
    : columns_(std::move(columns)), source_(std::move(source)) {
    if (columns_.empty()) throw_data("dataset needs at least one column (" + source_ + ")");
}

void Dataset::append_row(const std::vector<std::string_view>& cells) {
    if (cells.size() != columns_.size())
        throw_data("row has " + std::to_string(cells.size()) + " cells, expected " +
                   std::to_string(columns_.size()));
    for (const auto& c : cells) {
        offsets_.push_back(arena_.size());
        lengths_.push_back(static_cast<uint32_t>(c.size()));
        arena_.append(c);
    }
}

void Dataset::append_row(const std::vector<std::string>& cells) {
    std::vector<std::string_view> views(cells.begin(), cells.end());
    append_row(views);
}

void Dataset::set_labels(std::vector<Label> labels) {
    if (labels.size() != rows())
        throw_data("label count " + std::to_string(labels.size()) + " does not match row count " +
                   std::to_string(rows()));
    labels_ = std::move(labels);
    has_labels_ = true;
}

std::string_view Dataset::value(size_t row, size_t col) const {
    const size_t k = row * columns_.size() + col;
    return std::string_view(arena_).substr(offsets_[k], lengths_[k]);
}

std::optional<size_t> Dataset::column_index(std::string_view name) const {
    for (size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name) return i;
    return std::nullopt;
}

const std::vector<Label>& Dataset::labels() const {
    if (!has_labels_) throw_data("dataset '" + source_ + "' carries no labels");
    return labels_;
}

FeatureOnlyView Dataset::features_only() const { return FeatureOnlyView(*this); }

namespace {

// Splits one line on the delimiter. Double-quoted fields may contain the
// delimiter; a doubled quote inside a quoted field is a literal quote.
void split_line(std::string_view line, char delim, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    bool in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == delim) {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.push_back(std::move(field));
}

std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

}  // namespace

Dataset read_delimited(const std::string& path, const DelimitedReadOptions& options) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open '" + path + "' for reading");

    std::string line;
    size_t line_no = 0;
    std::vector<std::string> header;

    if (!std::getline(in, line)) {
        throw_data("'" + path + "' is empty");
    }
    ++line_no;
    std::vector<std::string> cells;
    split_line(strip_cr(line), options.delimiter, cells);
    if (options.has_header) {
        header = cells;
    } else {
        for (size_t i = 0; i < cells.size(); ++i) header.push_back("c" + std::to_string(i));
    }

    std::optional<size_t> label_col;
    if (!options.label_column.empty()) {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == options.label_column) label_col = i;
        if (!label_col)
            throw_data("label column '" + options.label_column + "' not found in '" + path + "'");
    }

    std::vector<std::string> feature_columns;
    for (size_t i = 0; i < header.size(); ++i)
        if (!label_col || i != *label_col) feature_columns.push_back(header[i]);

    Dataset ds(feature_columns, path);
    std::vector<Label> labels;
    std::vector<std::string_view> row_views;

    auto ingest = [&](const std::vector<std::string>& row) {
        if (row.size() != header.size())
            throw_data(path + ":" + std::to_string(line_no) + ": ragged row, " +
                       std::to_string(row.size()) + " cells where header has " +
                       std::to_string(header.size()));
        row_views.clear();
        for (size_t i = 0; i < row.size(); ++i) {
            if (label_col && i == *label_col) continue;
            row_views.emplace_back(row[i]);
        }
        ds.append_row(row_views);
        if (label_col)
            labels.push_back(row[*label_col] == options.positive_label ? Label::Anomaly
                                                                       : Label::Normal);
    };

    if (!options.has_header) ingest(cells);

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = strip_cr(line);
        if (sv.empty()) continue;
        split_line(sv, options.delimiter, cells);
        ingest(cells);
    }
    if (in.bad()) throw_io("read failure on '" + path + "'");

    if (label_col) ds.set_labels(std::move(labels));
    return ds;
}

void write_delimited(const Dataset& ds, const std::string& path, char delimiter) {
    std::ofstream out(path);
    if (!out) throw_io("cannot open '" + path + "' for writing");
    const auto& cols = ds.columns();
    for (size_t i = 0; i < cols.size(); ++i) {
        if (i) out << delimiter;
        out << cols[i];
    }
    if (ds.has_labels()) out << delimiter << "label";
    out << '\n';
    for (size_t r = 0; r < ds.rows(); ++r) {
        for (size_t c = 0; c < cols.size(); ++c) {
            if (c) out << delimiter;
            out << ds.value(r, c);
        }
        if (ds.has_labels()) out << delimiter << (ds.labels()[r] == Label::Anomaly ? "1" : "0");
        out << '\n';
    }
    out.flush();
    if (!out) throw_io("write failure on '" + path + "'");
}

DeadLetterSink::DeadLetterSink(const std::string& path)
    : out_(std::make_unique<std::ofstream>(path)) {
    if (!*out_) throw_io("cannot open dead-letter sink '" + path + "'");
}

DeadLetterSink::~DeadLetterSink() = default;

void DeadLetterSink::write(std::string_view line, std::string_view reason) {
    ++count_;
    if (out_ && *out_) {
        *out_ << "# " << reason << '\n' << line << '\n';
    }
}

NdjsonReader::NdjsonReader(std::istream& in, DeadLetterSink* dead_letter, bool fail_fast)
    : in_(&in), dead_letter_(dead_letter), fail_fast_(fail_fast) {}

std::optional<nlohmann::json> NdjsonReader::next() {
    std::string line;
    while (std::getline(*in_, line)) {
        ++lines_seen_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            --lines_seen_;  // blank separators are not records
            continue;
        }
        nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            if (fail_fast_)
                throw_data("malformed record at stream line " + std::to_string(lines_seen_));
            ++dead_lettered_;
            if (dead_letter_) dead_letter_->write(line, "malformed json record");
            continue;
        }
        ++records_yielded_;
        return parsed;
    }
    return std::nullopt;
}

}  // namespace isoguard
