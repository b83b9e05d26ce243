#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenwind/common.hpp"

namespace greenwind::dataio {

struct WeatherRecord {
    Timestamp timestamp{};
    AttributeValues values{};

    std::optional<double> get(Attribute a) const { return values[index_of(a)]; }
    bool complete() const;
    /// Names of the attributes flagged missing, in attribute order.
    std::vector<std::string> missing_fields() const;
};

struct EnergyRecord {
    Timestamp timestamp{};
    std::optional<double> wind_energy;  // MW
};

struct AlignedRow {
    Timestamp timestamp{};
    VariableValues values{};  // index 0 = wind energy, then attributes

    std::optional<double> wind_energy() const { return values[0]; }
    std::optional<double> get(Attribute a) const { return values[variable_index(a)]; }
    bool complete() const;
};

/// Time-joined weather and energy samples with strictly increasing timestamps.
struct AlignedDataset {
    std::vector<AlignedRow> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    /// Values of one variable (kVariableNames order) across all rows.
    std::vector<std::optional<double>> column(std::size_t variable) const;
    std::size_t complete_rows() const;
    /// Throws DataError when timestamps are not strictly increasing.
    void validate() const;
};

enum class TimestampFormat { iso8601, epoch_seconds };

struct ColumnSpec {
    std::string column;
    double scale = 1.0;  // applied to parsed values before validation
};

/// Maps CSV columns onto record fields. Field names are the attribute names
/// and "wind_energy"; columns present in the file but not mapped are ignored.
struct CsvMapping {
    char delimiter = ',';
    std::string timestamp_column = "timestamp";
    TimestampFormat timestamp_format = TimestampFormat::iso8601;
    std::map<std::string, ColumnSpec> columns;
    /// Cell contents treated as missing in addition to empty or unparseable cells.
    std::vector<std::string> missing_tokens;
};

/// Canonical layout: a "timestamp" column plus one column per attribute name.
CsvMapping default_weather_mapping();
/// Canonical layout: "timestamp" and "wind_energy".
CsvMapping default_energy_mapping();

/// Reads a mapping object; keys absent from the JSON keep the values of `defaults`.
/// A "columns" object replaces the default column set entirely.
CsvMapping mapping_from_json(const nlohmann::json& j, const CsvMapping& defaults);
nlohmann::json mapping_to_json(const CsvMapping& m);

std::vector<WeatherRecord> load_weather_csv(const std::filesystem::path& path, const CsvMapping& mapping);
std::vector<WeatherRecord> read_weather_csv(std::istream& in, const CsvMapping& mapping);

std::vector<EnergyRecord> load_energy_csv(const std::filesystem::path& path, const CsvMapping& mapping);
std::vector<EnergyRecord> read_energy_csv(std::istream& in, const CsvMapping& mapping);

/// Canonical writers: ISO-8601 UTC timestamps, shortest round-trip numbers,
/// empty cells for missing values.
void write_weather_csv(std::ostream& out, const std::vector<WeatherRecord>& records);
void write_energy_csv(std::ostream& out, const std::vector<EnergyRecord>& records);
void write_dataset_csv(std::ostream& out, const AlignedDataset& data);

/// Reads the layout produced by write_dataset_csv (extra columns are ignored).
AlignedDataset load_dataset_csv(const std::filesystem::path& path);
AlignedDataset read_dataset_csv(std::istream& in);

struct JoinReport {
    std::size_t weather_records = 0;
    std::size_t energy_records = 0;
    std::size_t matched = 0;
    /// Energy records with no weather record within tolerance.
    std::size_t dropped_out_of_tolerance = 0;
    /// Energy records whose nearest weather record was claimed by a closer one.
    std::size_t dropped_duplicate = 0;
    std::int64_t tolerance_seconds = 0;

    std::size_t dropped() const { return dropped_out_of_tolerance + dropped_duplicate; }
};

nlohmann::json to_json(const JoinReport& r);

struct AlignResult {
    AlignedDataset dataset;
    JoinReport report;
};

inline constexpr std::int64_t kDefaultAlignTolerance = 1800;

/// Nearest-neighbour join of energy onto weather timestamps.
///
/// Each energy record is matched to the weather record closest in time (the
/// earlier one on a tie). Matches farther than `tolerance_seconds` are
/// dropped. A weather record is used at most once: when several energy
/// records pick the same weather record, the closest keeps it (earlier on a
/// tie) and the others are dropped as duplicates. Rows carry the energy
/// timestamp. Both inputs must be sorted with strictly increasing timestamps.
AlignResult align(const std::vector<WeatherRecord>& weather, const std::vector<EnergyRecord>& energy,
                  std::int64_t tolerance_seconds = kDefaultAlignTolerance);

/// Splits a dataset back into its weather and energy halves.
std::vector<WeatherRecord> weather_of(const AlignedDataset& data);
std::vector<EnergyRecord> energy_of(const AlignedDataset& data);

Timestamp parse_timestamp(std::string_view text, TimestampFormat format);

}  // namespace greenwind::dataio
