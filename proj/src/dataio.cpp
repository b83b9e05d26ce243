#include "greenwind/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "csv.hpp"

namespace greenwind::dataio {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool parse_int(std::string_view s, std::int64_t& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

bool parse_fixed(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const auto res = std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return res.ec == std::errc{};
}

std::optional<Timestamp> parse_iso8601(std::string_view s) {
    using namespace std::chrono;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!parse_fixed(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !parse_fixed(s, 5, 2, mo) || s[7] != '-' ||
        !parse_fixed(s, 8, 2, d)) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    std::size_t pos = 10;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        ++pos;
        if (!parse_fixed(s, pos, 2, h) || pos + 2 >= s.size() || s[pos + 2] != ':' || !parse_fixed(s, pos + 3, 2, mi)) {
            return std::nullopt;
        }
        pos += 5;
        if (pos < s.size() && s[pos] == ':') {
            if (!parse_fixed(s, pos + 1, 2, sec)) return std::nullopt;
            pos += 3;
            if (pos < s.size() && s[pos] == '.') {
                // Sub-second digits are truncated.
                ++pos;
                const std::size_t start = pos;
                while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
                if (pos == start) return std::nullopt;
            }
        }
    }
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    seconds offset{0};
    if (pos < s.size()) {
        if (s[pos] == 'Z') {
            ++pos;
        } else if (s[pos] == '+' || s[pos] == '-') {
            const int sign = s[pos] == '+' ? 1 : -1;
            int oh = 0, om = 0;
            if (!parse_fixed(s, pos + 1, 2, oh)) return std::nullopt;
            pos += 3;
            if (pos < s.size() && s[pos] == ':') ++pos;
            if (pos < s.size()) {
                if (!parse_fixed(s, pos, 2, om)) return std::nullopt;
                pos += 2;
            }
            offset = seconds{sign * (oh * 3600 + om * 60)};
        }
    }
    if (pos != s.size()) return std::nullopt;
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec} - offset;
}

struct Cell {
    std::optional<double> value;
};

class Table {
public:
    Table(std::istream& in, const CsvMapping& mapping) : reader_(in, mapping.delimiter), mapping_(mapping) {
        std::vector<std::string> header;
        if (!reader_.next(header)) throw DataError("malformed header: input is empty");
        width_ = header.size();
        if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
        auto find = [&](const std::string& name) -> std::optional<std::size_t> {
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (trim(header[i]) == name) return i;
            }
            return std::nullopt;
        };
        auto ts = find(mapping.timestamp_column);
        if (!ts) throw DataError("malformed header: missing timestamp column '" + mapping.timestamp_column + "'");
        timestamp_index_ = *ts;
        std::string missing;
        for (const auto& [field, spec] : mapping.columns) {
            if (auto idx = find(spec.column)) {
                field_index_.emplace(field, *idx);
            } else {
                missing += (missing.empty() ? "'" : ", '") + spec.column + "' (mapped to " + field + ")";
            }
        }
        if (!missing.empty()) throw DataError("malformed header: missing column(s) " + missing);
    }

    bool next() {
        if (!reader_.next(fields_)) return false;
        if (fields_.size() != width_) {
            throw RowError(reader_.line(), "expected " + std::to_string(width_) + " fields, found " +
                                               std::to_string(fields_.size()));
        }
        return true;
    }

    std::size_t line() const { return reader_.line(); }

    Timestamp timestamp() const {
        const std::string_view text = trim(fields_[timestamp_index_]);
        try {
            return parse_timestamp(text, mapping_.timestamp_format);
        } catch (const DataError& e) {
            throw RowError(line(), e.what());
        }
    }

    bool has(const std::string& field) const { return field_index_.contains(field); }

    std::optional<double> number(const std::string& field) const {
        const auto it = field_index_.find(field);
        if (it == field_index_.end()) return std::nullopt;
        const std::string_view text = trim(fields_[it->second]);
        if (text.empty()) return std::nullopt;
        for (const auto& token : mapping_.missing_tokens) {
            if (text == token) return std::nullopt;
        }
        std::string_view s = text;
        if (s.front() == '+') s.remove_prefix(1);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
        return v * mapping_.columns.at(field).scale;
    }

private:
    detail::CsvReader reader_;
    const CsvMapping& mapping_;
    std::size_t width_ = 0;
    std::size_t timestamp_index_ = 0;
    std::map<std::string, std::size_t> field_index_;
    std::vector<std::string> fields_;
};

void check_range(std::size_t line, Attribute a, double v) {
    auto fail = [&](const char* rule) {
        throw RowError(line, std::string(name_of(a)) + " = " + format_double(v) + " violates " + rule);
    };
    switch (a) {
        case Attribute::cloud_cover:
            if (v < 0.0 || v > 1.0) fail("0 <= cloud_cover <= 1");
            break;
        case Attribute::wind_direction:
            if (v < 0.0 || v >= 360.0) fail("0 <= wind_direction < 360");
            break;
        case Attribute::wind_speed:
        case Attribute::precipitation:
        case Attribute::sunshine:
            if (v < 0.0) fail(">= 0");
            break;
        default:
            break;
    }
}

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

void write_cell(std::ostream& out, const std::optional<double>& v) {
    if (v) out << format_double(*v);
}

}  // namespace

bool WeatherRecord::complete() const {
    return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

std::vector<std::string> WeatherRecord::missing_fields() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
        if (!values[i]) out.emplace_back(kAttributeNames[i]);
    }
    return out;
}

bool AlignedRow::complete() const {
    return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

std::vector<std::optional<double>> AlignedDataset::column(std::size_t variable) const {
    std::vector<std::optional<double>> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.values.at(variable));
    return out;
}

std::size_t AlignedDataset::complete_rows() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.complete(); }));
}

void AlignedDataset::validate() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].timestamp <= rows[i - 1].timestamp) {
            throw DataError("dataset timestamps not strictly increasing at row " + std::to_string(i) + " (" +
                            format_timestamp(rows[i].timestamp) + ")");
        }
    }
}

Timestamp parse_timestamp(std::string_view text, TimestampFormat format) {
    text = trim(text);
    if (format == TimestampFormat::epoch_seconds) {
        std::int64_t secs = 0;
        if (!parse_int(text, secs)) throw DataError("unparseable epoch timestamp '" + std::string(text) + "'");
        return Timestamp{std::chrono::seconds{secs}};
    }
    if (auto t = parse_iso8601(text)) return *t;
    throw DataError("unparseable ISO-8601 timestamp '" + std::string(text) + "'");
}

CsvMapping default_weather_mapping() {
    CsvMapping m;
    for (auto name : kAttributeNames) m.columns.emplace(std::string(name), ColumnSpec{std::string(name)});
    return m;
}

CsvMapping default_energy_mapping() {
    CsvMapping m;
    m.columns.emplace("wind_energy", ColumnSpec{"wind_energy"});
    return m;
}

CsvMapping mapping_from_json(const nlohmann::json& j, const CsvMapping& defaults) {
    CsvMapping m = defaults;
    if (!j.is_object()) throw DataError("column mapping must be a JSON object");
    if (j.contains("delimiter")) {
        const auto d = j.at("delimiter").get<std::string>();
        if (d.size() != 1) throw DataError("delimiter must be a single character");
        m.delimiter = d[0];
    }
    if (j.contains("timestamp")) {
        const auto& ts = j.at("timestamp");
        if (ts.is_string()) {
            m.timestamp_column = ts.get<std::string>();
        } else {
            m.timestamp_column = ts.value("column", m.timestamp_column);
            const auto fmt = ts.value("format", std::string("iso8601"));
            if (fmt == "iso8601") {
                m.timestamp_format = TimestampFormat::iso8601;
            } else if (fmt == "epoch") {
                m.timestamp_format = TimestampFormat::epoch_seconds;
            } else {
                throw DataError("unknown timestamp format '" + fmt + "' (expected iso8601 or epoch)");
            }
        }
    }
    if (j.contains("columns")) {
        m.columns.clear();
        for (const auto& [field, spec] : j.at("columns").items()) {
            if (field != "wind_energy" && !attribute_from_name(field)) {
                throw DataError("unknown field '" + field + "' in column mapping");
            }
            if (spec.is_string()) {
                m.columns.emplace(field, ColumnSpec{spec.get<std::string>()});
            } else {
                ColumnSpec cs{spec.at("column").get<std::string>(), spec.value("scale", 1.0)};
                if (!std::isfinite(cs.scale) || cs.scale == 0.0) {
                    throw DataError("scale for '" + field + "' must be finite and non-zero");
                }
                m.columns.emplace(field, cs);
            }
        }
    }
    if (j.contains("missing")) m.missing_tokens = j.at("missing").get<std::vector<std::string>>();
    return m;
}

nlohmann::json mapping_to_json(const CsvMapping& m) {
    nlohmann::json cols = nlohmann::json::object();
    for (const auto& [field, spec] : m.columns) {
        if (spec.scale == 1.0) {
            cols[field] = spec.column;
        } else {
            cols[field] = {{"column", spec.column}, {"scale", spec.scale}};
        }
    }
    return {
        {"delimiter", std::string(1, m.delimiter)},
        {"timestamp",
         {{"column", m.timestamp_column},
          {"format", m.timestamp_format == TimestampFormat::iso8601 ? "iso8601" : "epoch"}}},
        {"columns", cols},
        {"missing", m.missing_tokens},
    };
}

std::vector<WeatherRecord> read_weather_csv(std::istream& in, const CsvMapping& mapping) {
    for (const auto& [field, spec] : mapping.columns) {
        if (!attribute_from_name(field)) throw DataError("weather mapping has non-weather field '" + field + "'");
    }
    Table table(in, mapping);
    std::vector<WeatherRecord> out;
    while (table.next()) {
        WeatherRecord rec;
        rec.timestamp = table.timestamp();
        for (std::size_t i = 0; i < kNumAttributes; ++i) {
            const std::string field(kAttributeNames[i]);
            rec.values[i] = table.number(field);
            if (rec.values[i]) check_range(table.line(), static_cast<Attribute>(i), *rec.values[i]);
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<WeatherRecord> load_weather_csv(const std::filesystem::path& path, const CsvMapping& mapping) {
    auto in = open(path);
    return read_weather_csv(in, mapping);
}

std::vector<EnergyRecord> read_energy_csv(std::istream& in, const CsvMapping& mapping) {
    if (!mapping.columns.contains("wind_energy")) throw DataError("energy mapping lacks the wind_energy field");
    if (mapping.columns.size() != 1) throw DataError("energy mapping may only map wind_energy");
    Table table(in, mapping);
    std::vector<EnergyRecord> out;
    while (table.next()) {
        EnergyRecord rec;
        rec.timestamp = table.timestamp();
        rec.wind_energy = table.number("wind_energy");
        if (rec.wind_energy && *rec.wind_energy < 0.0) {
            throw RowError(table.line(), "wind_energy = " + format_double(*rec.wind_energy) + " is negative");
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<EnergyRecord> load_energy_csv(const std::filesystem::path& path, const CsvMapping& mapping) {
    auto in = open(path);
    return read_energy_csv(in, mapping);
}

void write_weather_csv(std::ostream& out, const std::vector<WeatherRecord>& records) {
    out << "timestamp";
    for (auto name : kAttributeNames) out << ',' << name;
    out << '\n';
    for (const auto& r : records) {
        out << format_timestamp(r.timestamp);
        for (const auto& v : r.values) {
            out << ',';
            write_cell(out, v);
        }
        out << '\n';
    }
}

void write_energy_csv(std::ostream& out, const std::vector<EnergyRecord>& records) {
    out << "timestamp,wind_energy\n";
    for (const auto& r : records) {
        out << format_timestamp(r.timestamp) << ',';
        write_cell(out, r.wind_energy);
        out << '\n';
    }
}

void write_dataset_csv(std::ostream& out, const AlignedDataset& data) {
    out << "timestamp";
    for (auto name : kVariableNames) out << ',' << name;
    out << '\n';
    for (const auto& r : data.rows) {
        out << format_timestamp(r.timestamp);
        for (const auto& v : r.values) {
            out << ',';
            write_cell(out, v);
        }
        out << '\n';
    }
}

AlignedDataset read_dataset_csv(std::istream& in) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    std::istringstream weather_in(text);
    std::istringstream energy_in(text);
    const auto weather = read_weather_csv(weather_in, default_weather_mapping());
    const auto energy = read_energy_csv(energy_in, default_energy_mapping());
    AlignedDataset data;
    data.rows.reserve(weather.size());
    for (std::size_t i = 0; i < weather.size(); ++i) {
        AlignedRow row;
        row.timestamp = weather[i].timestamp;
        row.values[0] = energy[i].wind_energy;
        std::copy(weather[i].values.begin(), weather[i].values.end(), row.values.begin() + 1);
        data.rows.push_back(row);
    }
    data.validate();
    return data;
}

AlignedDataset load_dataset_csv(const std::filesystem::path& path) {
    auto in = open(path);
    return read_dataset_csv(in);
}

nlohmann::json to_json(const JoinReport& r) {
    return {
        {"weather_records", r.weather_records},
        {"energy_records", r.energy_records},
        {"matched", r.matched},
        {"dropped", r.dropped()},
        {"dropped_out_of_tolerance", r.dropped_out_of_tolerance},
        {"dropped_duplicate", r.dropped_duplicate},
        {"tolerance_seconds", r.tolerance_seconds},
    };
}

AlignResult align(const std::vector<WeatherRecord>& weather, const std::vector<EnergyRecord>& energy,
                  std::int64_t tolerance_seconds) {
    if (tolerance_seconds < 0) throw DataError("alignment tolerance must be non-negative");
    auto check_sorted = [](const auto& records, const char* what) {
        for (std::size_t i = 1; i < records.size(); ++i) {
            if (records[i].timestamp <= records[i - 1].timestamp) {
                throw DataError(std::string(what) + " timestamps not strictly increasing at record " +
                                std::to_string(i) + " (" + format_timestamp(records[i].timestamp) + ")");
            }
        }
    };
    check_sorted(weather, "weather");
    check_sorted(energy, "energy");

    AlignResult result;
    auto& report = result.report;
    report.weather_records = weather.size();
    report.energy_records = energy.size();
    report.tolerance_seconds = tolerance_seconds;

    // Candidate (energy index, distance) per weather index, resolved after the scan.
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::size_t> claim(weather.size(), kNone);
    std::vector<std::int64_t> claim_distance(weather.size(), 0);

    std::size_t w = 0;
    for (std::size_t e = 0; e < energy.size(); ++e) {
        const auto t = energy[e].timestamp;
        while (w < weather.size() && weather[w].timestamp < t) ++w;
        // Nearest among weather[w-1] (before) and weather[w] (at or after); earlier wins ties.
        std::size_t best = kNone;
        std::int64_t best_distance = 0;
        if (w > 0) {
            best = w - 1;
            best_distance = (t - weather[w - 1].timestamp).count();
        }
        if (w < weather.size()) {
            const std::int64_t d = (weather[w].timestamp - t).count();
            if (best == kNone || d < best_distance) {
                best = w;
                best_distance = d;
            }
        }
        if (best == kNone || best_distance > tolerance_seconds) {
            ++report.dropped_out_of_tolerance;
            continue;
        }
        if (claim[best] == kNone) {
            claim[best] = e;
            claim_distance[best] = best_distance;
        } else {
            ++report.dropped_duplicate;
            if (best_distance < claim_distance[best]) {
                claim[best] = e;
                claim_distance[best] = best_distance;
            }
        }
    }

    for (std::size_t i = 0; i < weather.size(); ++i) {
        if (claim[i] == kNone) continue;
        const auto& er = energy[claim[i]];
        AlignedRow row;
        row.timestamp = er.timestamp;
        row.values[0] = er.wind_energy;
        std::copy(weather[i].values.begin(), weather[i].values.end(), row.values.begin() + 1);
        result.dataset.rows.push_back(row);
    }
    report.matched = result.dataset.rows.size();
    return result;
}

std::vector<WeatherRecord> weather_of(const AlignedDataset& data) {
    std::vector<WeatherRecord> out;
    out.reserve(data.size());
    for (const auto& r : data.rows) {
        WeatherRecord w;
        w.timestamp = r.timestamp;
        std::copy(r.values.begin() + 1, r.values.end(), w.values.begin());
        out.push_back(w);
    }
    return out;
}

std::vector<EnergyRecord> energy_of(const AlignedDataset& data) {
    std::vector<EnergyRecord> out;
    out.reserve(data.size());
    for (const auto& r : data.rows) out.push_back({r.timestamp, r.values[0]});
    return out;
}

}  // namespace greenwind::dataio
