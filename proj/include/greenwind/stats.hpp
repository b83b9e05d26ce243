#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "greenwind/dataio.hpp"

namespace greenwind::stats {

/// Pearson correlation is undefined because one series is constant.
class UndefinedCorrelationError : public DataError {
public:
    using DataError::DataError;
};

/// Fewer than two complete pairs remain after pairwise deletion.
class InsufficientDataError : public DataError {
public:
    using DataError::DataError;
};

class ZeroVarianceError : public DataError {
public:
    ZeroVarianceError(std::string variable, const std::string& what) : DataError(what), variable_(std::move(variable)) {}
    const std::string& variable() const noexcept { return variable_; }

private:
    std::string variable_;
};

/// Sample Pearson correlation over the pairs where both values are present.
double pearson(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y);
double pearson(std::span<const double> x, std::span<const double> y);

/// Symmetric 8x8 matrix over kVariableNames (wind energy first).
struct CorrelationMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> values;

    std::size_t size() const { return labels.size(); }
    double at(std::size_t i, std::size_t j) const { return values.at(i).at(j); }
    /// Correlation of an attribute with wind energy.
    double energy_correlation(Attribute a) const { return values[0][variable_index(a)]; }

    /// The canonical eight labels, in order, with a square matrix of that size.
    void validate() const;
};

/// Pairwise-deleted Pearson matrix of every variable against every other.
CorrelationMatrix correlation_matrix(const dataio::AlignedDataset& data);

/// Reads a labelled matrix in the layout written by write_correlation_csv.
/// Labels must be the eight canonical variable names in order.
CorrelationMatrix read_correlation_csv(std::istream& in);
CorrelationMatrix load_correlation_csv(const std::filesystem::path& path);
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);
nlohmann::json to_json(const CorrelationMatrix& m);

struct MeanStd {
    double mean = 0.0;
    double stddev = 1.0;
};

/// Mean and population standard deviation of each variable (kVariableNames order).
struct StandardizationParams {
    std::array<MeanStd, kNumVariables> variables{};

    const MeanStd& energy() const { return variables[0]; }
    const MeanStd& attribute(Attribute a) const { return variables[variable_index(a)]; }

    double to_standard(std::size_t variable, double value) const {
        const auto& p = variables[variable];
        return (value - p.mean) / p.stddev;
    }
    double from_standard(std::size_t variable, double z) const {
        const auto& p = variables[variable];
        return p.mean + z * p.stddev;
    }
    /// Throws DataError unless every stddev is finite and positive.
    void validate() const;
};

/// Mean and population (divide-by-n) standard deviation over present values.
/// Throws ZeroVarianceError (naming `name`) for a constant column and
/// InsufficientDataError when no value is present.
MeanStd describe(std::span<const std::optional<double>> column, const std::string& name = "column");

/// (value - mean) / stddev for every present value; missing stays missing.
std::vector<std::optional<double>> standardize_column(std::span<const std::optional<double>> column,
                                                      const MeanStd& params);

struct Standardized {
    dataio::AlignedDataset data;
    StandardizationParams params;
};

Standardized standardize(const dataio::AlignedDataset& data);
dataio::AlignedDataset destandardize(const dataio::AlignedDataset& standardized, const StandardizationParams& params);

struct MonthlySummary {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double median = 0.0;
};

struct MonthlyDistribution {
    unsigned month = 1;  // 1-12, pooled across years
    std::vector<double> bin_edges;  // MW, count + 1 edges; bins are [e_i, e_{i+1})
    std::vector<std::size_t> counts;
    std::size_t samples = 0;
    MonthlySummary summary;
};

inline constexpr double kDefaultBinWidth = 1.0;

/// Per calendar month histograms of wind energy, pooled across years.
/// All months share bin edges starting at 0 MW. Records with missing energy
/// are skipped.
std::vector<MonthlyDistribution> monthly_distribution(const std::vector<dataio::EnergyRecord>& energy,
                                                      double bin_width = kDefaultBinWidth);

/// Long-format CSV: month,bin_lower,bin_upper,count
void write_distribution_csv(std::ostream& out, const std::vector<MonthlyDistribution>& dists);
/// month,samples,min,max,mean,median
void write_distribution_summary_csv(std::ostream& out, const std::vector<MonthlyDistribution>& dists);
nlohmann::json to_json(const std::vector<MonthlyDistribution>& dists);

/// Pseudo-variable for plot extracts: day of year counted from 1 January of
/// the first sample's year, taken mod 365.
inline constexpr std::string_view kDayOfYear = "day_of_year";

struct PlotSeries {
    std::string x_name;
    std::string y_name;
    std::vector<double> x;
    std::vector<double> y;

    std::string file_stem() const { return y_name + "_vs_" + x_name; }
};

/// The x/y pairs plotted in the original analysis: wind speed against wind
/// direction, wind energy against each attribute and against day of year,
/// wind speed against the remaining attributes, and every variable against
/// day of year.
std::vector<std::pair<std::string, std::string>> plot_extract_pairs();

/// Rows where both variables are present.
PlotSeries plot_extract(const dataio::AlignedDataset& data, const std::string& x_name, const std::string& y_name);
void write_plot_csv(std::ostream& out, const PlotSeries& s);

/// sin/cos components of wind direction (treated as a circle, in degrees),
/// an optional alternative to the default linear treatment.
struct DirectionComponents {
    std::vector<std::optional<double>> sine;
    std::vector<std::optional<double>> cosine;
};
DirectionComponents direction_components(const dataio::AlignedDataset& data);

}  // namespace greenwind::stats
