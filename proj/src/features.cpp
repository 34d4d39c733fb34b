#include "features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace isoguard {

const char* encoder_kind_name(EncoderKind k) {
    switch (k) {
        case EncoderKind::Timestamp: return "timestamp";
        case EncoderKind::Ip: return "ip";
        case EncoderKind::Categorical: return "categorical";
        case EncoderKind::NumericPassthrough: return "numeric";
    }
    return "numeric";
}

EncoderKind encoder_kind_from_name(std::string_view name) {
    if (name == "timestamp") return EncoderKind::Timestamp;
    if (name == "ip") return EncoderKind::Ip;
    if (name == "categorical") return EncoderKind::Categorical;
    if (name == "numeric" || name == "numeric_passthrough") return EncoderKind::NumericPassthrough;
    throw_usage("unknown encoder kind '" + std::string(name) + "'");
}

SchemaConfig SchemaConfig::from_json(const nlohmann::json& doc) {
    SchemaConfig cfg;
    if (doc.contains("timezone_offset_minutes"))
        cfg.timezone_offset_minutes = doc.at("timezone_offset_minutes").get<int>();
    if (doc.contains("columns")) {
        for (const auto& col : doc.at("columns")) {
            ColumnSpec spec;
            spec.name = col.at("name").get<std::string>();
            spec.kind = encoder_kind_from_name(col.at("encoder").get<std::string>());
            cfg.columns.push_back(std::move(spec));
        }
    }
    return cfg;
}

SchemaConfig SchemaConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open schema config '" + path + "'");
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw_data("schema config '" + path + "' is not valid JSON");
    return from_json(doc);
}

nlohmann::json SchemaConfig::to_json() const {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : columns)
        cols.push_back({{"name", c.name}, {"encoder", encoder_kind_name(c.kind)}});
    return {{"columns", cols}, {"timezone_offset_minutes", timezone_offset_minutes}};
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

bool parse_uint(std::string_view s, size_t pos, size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int value = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    out = value;
    return true;
}

}  // namespace

double encode_timestamp(std::string_view ts, int timezone_offset_minutes) {
    // Accepted shape: YYYY-MM-DD[ T]HH:MM[:SS[.frac]][Z|+HH[:MM]|-HH[:MM]]
    auto fail = [&]() -> double {
        throw_data("unparseable timestamp '" + std::string(ts) + "'");
    };

    int year, month, day, hour, minute;
    if (ts.size() < 16) return fail();
    if (!parse_uint(ts, 0, 4, year) || ts[4] != '-' || !parse_uint(ts, 5, 2, month) ||
        ts[7] != '-' || !parse_uint(ts, 8, 2, day))
        return fail();
    if (ts[10] != ' ' && ts[10] != 'T') return fail();
    if (!parse_uint(ts, 11, 2, hour) || ts[13] != ':' || !parse_uint(ts, 14, 2, minute))
        return fail();

    size_t pos = 16;
    if (pos < ts.size() && ts[pos] == ':') {
        int second;
        if (!parse_uint(ts, pos + 1, 2, second)) return fail();
        pos += 3;
        if (pos < ts.size() && ts[pos] == '.') {
            ++pos;
            size_t frac_start = pos;
            while (pos < ts.size() && std::isdigit(static_cast<unsigned char>(ts[pos]))) ++pos;
            if (pos == frac_start) return fail();
        }
    }

    // Optional zone designator; when present the instant is converted into the
    // configured fixed zone before the weekday/hour split.
    bool zoned = false;
    int zone_minutes = 0;
    if (pos < ts.size()) {
        char c = ts[pos];
        if (c == 'Z') {
            zoned = true;
            ++pos;
        } else if (c == '+' || c == '-') {
            int zh, zm = 0;
            if (!parse_uint(ts, pos + 1, 2, zh)) return fail();
            size_t zpos = pos + 3;
            if (zpos < ts.size() && ts[zpos] == ':') {
                if (!parse_uint(ts, zpos + 1, 2, zm)) return fail();
                zpos += 3;
            } else if (zpos + 1 < ts.size()) {
                if (!parse_uint(ts, zpos, 2, zm)) return fail();
                zpos += 2;
            }
            zone_minutes = (zh * 60 + zm) * (c == '-' ? -1 : 1);
            zoned = true;
            pos = zpos;
        }
    }
    if (pos != ts.size()) return fail();

    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59) return fail();

    int64_t minutes = days_from_civil(year, static_cast<unsigned>(month),
                                      static_cast<unsigned>(day)) * 1440 +
                      hour * 60 + minute;
    if (zoned) minutes = minutes - zone_minutes + timezone_offset_minutes;

    const int64_t day_index = floor_div(minutes, 1440);
    const int64_t minute_of_day = minutes - day_index * 1440;
    const int weekday = static_cast<int>(((day_index % 7) + 7 + 3) % 7);  // Monday = 0
    const int hour_of_day = static_cast<int>(minute_of_day / 60);
    return static_cast<double>(weekday * 24 + hour_of_day);
}

double encode_ip(std::string_view ip) {
    auto fail = [&]() -> double {
        throw_data("invalid IPv4 address '" + std::string(ip) +
                   "' (IPv6 and hostnames are not supported)");
    };
    uint64_t value = 0;
    size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        if (octet > 0) {
            if (pos >= ip.size() || ip[pos] != '.') return fail();
            ++pos;
        }
        size_t start = pos;
        uint32_t v = 0;
        while (pos < ip.size() && ip[pos] >= '0' && ip[pos] <= '9') {
            v = v * 10 + static_cast<uint32_t>(ip[pos] - '0');
            if (v > 255) return fail();
            ++pos;
        }
        if (pos == start || pos - start > 3) return fail();
        value = value * 1000 + v;
    }
    if (pos != ip.size()) return fail();
    return static_cast<double>(value);
}

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double parse_numeric(std::string_view raw) {
    size_t b = 0, e = raw.size();
    while (b < e && (raw[b] == ' ' || raw[b] == '\t')) ++b;
    while (e > b && (raw[e - 1] == ' ' || raw[e - 1] == '\t')) --e;
    if (b == e) throw_data("empty value where a number was expected");
    double out;
    auto [ptr, ec] = std::from_chars(raw.data() + b, raw.data() + e, out);
    if (ec != std::errc() || ptr != raw.data() + e)
        throw_data("'" + std::string(raw) + "' is not a number");
    if (!std::isfinite(out)) throw_data("non-finite value '" + std::string(raw) + "'");
    return out;
}

}  // namespace

std::map<std::string, size_t> fit_categorical(std::span<const std::string_view> column_values) {
    std::unordered_map<std::string, uint64_t> counts;
    for (const auto& v : column_values) ++counts[to_lower(v)];

    std::vector<std::pair<std::string, uint64_t>> order(counts.begin(), counts.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::map<std::string, size_t> vocab;
    for (size_t i = 0; i < order.size(); ++i) vocab.emplace(std::move(order[i].first), i);
    return vocab;
}

FeatureSchema::FeatureSchema(std::vector<ColumnSpec> columns,
                             std::vector<std::map<std::string, size_t>> vocabs,
                             int timezone_offset_minutes)
    : columns_(std::move(columns)),
      vocabs_(std::move(vocabs)),
      tz_offset_minutes_(timezone_offset_minutes),
      fitted_(true) {
    if (vocabs_.size() != columns_.size()) throw_model("schema vocab/column count mismatch");
}

FeatureSchema FeatureSchema::fit(const SchemaConfig& config, const FeatureOnlyView& data) {
    FeatureSchema schema;
    schema.tz_offset_minutes_ = config.timezone_offset_minutes;

    if (config.columns.empty()) {
        // Auto schema: every dataset column is numeric passthrough.
        for (const auto& name : data.columns())
            schema.columns_.push_back({name, EncoderKind::NumericPassthrough});
    } else {
        schema.columns_ = config.columns;
    }

    schema.vocabs_.resize(schema.columns_.size());
    std::vector<size_t> binding;
    for (const auto& spec : schema.columns_) {
        auto idx = data.column_index(spec.name);
        if (!idx)
            throw_data("schema column '" + spec.name + "' not present in dataset '" +
                       data.source() + "'");
        binding.push_back(*idx);
    }

    for (size_t c = 0; c < schema.columns_.size(); ++c) {
        if (schema.columns_[c].kind != EncoderKind::Categorical) continue;
        if (data.rows() == 0)
            throw_data("cannot fit categorical column '" + schema.columns_[c].name +
                       "' on an empty dataset");
        std::vector<std::string_view> values;
        values.reserve(data.rows());
        for (size_t r = 0; r < data.rows(); ++r) values.push_back(data.value(r, binding[c]));
        schema.vocabs_[c] = fit_categorical(values);
    }

    schema.fitted_ = true;
    return schema;
}

std::vector<size_t> FeatureSchema::bind(const std::vector<std::string>& dataset_columns) const {
    std::vector<size_t> binding;
    binding.reserve(columns_.size());
    for (const auto& spec : columns_) {
        auto it = std::find(dataset_columns.begin(), dataset_columns.end(), spec.name);
        if (it == dataset_columns.end())
            throw_data("schema column '" + spec.name + "' missing from input");
        binding.push_back(static_cast<size_t>(it - dataset_columns.begin()));
    }
    return binding;
}

double FeatureSchema::encode_value(size_t column, std::string_view raw) const {
    const ColumnSpec& spec = columns_[column];
    switch (spec.kind) {
        case EncoderKind::Timestamp:
            return encode_timestamp(raw, tz_offset_minutes_);
        case EncoderKind::Ip:
            return encode_ip(raw);
        case EncoderKind::Categorical: {
            const auto& vocab = vocabs_[column];
            auto it = vocab.find(to_lower(raw));
            if (it == vocab.end()) {
                oov_count_.fetch_add(1, std::memory_order_relaxed);
                return static_cast<double>(vocab.size());  // reserved OOV slot
            }
            return static_cast<double>(it->second);
        }
        case EncoderKind::NumericPassthrough:
            return parse_numeric(raw);
    }
    throw_data("unreachable encoder kind");
}

std::vector<double> FeatureSchema::transform_row(const FeatureOnlyView& data, size_t row,
                                                 std::span<const size_t> binding) const {
    if (!fitted_) throw_model("schema is not fitted");
    std::vector<double> out(columns_.size());
    for (size_t c = 0; c < columns_.size(); ++c) {
        try {
            out[c] = encode_value(c, data.value(row, binding[c]));
        } catch (const Error& e) {
            throw Error(e.kind(), "row " + std::to_string(row) + ", column '" + columns_[c].name +
                                      "': " + e.what());
        }
    }
    return out;
}

std::vector<double> FeatureSchema::transform_json(const nlohmann::json& record) const {
    if (!fitted_) throw_model("schema is not fitted");
    std::vector<double> out(columns_.size());
    for (size_t c = 0; c < columns_.size(); ++c) {
        const auto& spec = columns_[c];
        auto it = record.find(spec.name);
        if (it == record.end()) throw_data("record is missing column '" + spec.name + "'");
        if (spec.kind == EncoderKind::NumericPassthrough && it->is_number()) {
            out[c] = it->get<double>();
            continue;
        }
        std::string raw = it->is_string() ? it->get<std::string>() : it->dump();
        try {
            out[c] = encode_value(c, raw);
        } catch (const Error& e) {
            throw Error(e.kind(), "column '" + spec.name + "': " + e.what());
        }
    }
    return out;
}

FeatureMatrix FeatureSchema::transform_all(const FeatureOnlyView& data) const {
    if (!fitted_) throw_model("schema is not fitted");
    auto binding = bind(data.columns());
    FeatureMatrix m(columns_.size());
    m.reserve_rows(data.rows());
    for (size_t r = 0; r < data.rows(); ++r) m.append_row(transform_row(data, r, binding));
    return m;
}

}  // namespace isoguard
