#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenwind/stats.hpp"

namespace greenwind::model {

/// The attribute-attribute correlation block is singular or too badly conditioned.
class CollinearityError : public DataError {
public:
    CollinearityError(std::string first, std::string second, double condition, const std::string& what)
        : DataError(what), first_(std::move(first)), second_(std::move(second)), condition_(condition) {}
    /// The most strongly correlated attribute pair.
    const std::string& first() const noexcept { return first_; }
    const std::string& second() const noexcept { return second_; }
    double condition_number() const noexcept { return condition_; }

private:
    std::string first_;
    std::string second_;
    double condition_;
};

enum class Provenance { fitted, fixed_eq1 };

std::string to_string(Provenance p);

struct FitMetadata {
    std::size_t rows = 0;
    std::size_t complete_rows = 0;
    double condition_number = 0.0;
};

/// Linear model in standardized space.
///
/// A prediction standardizes each attribute with the stored parameters,
/// takes the dot product with `coefficients`, and maps the result back to MW
/// through the wind-energy mean and standard deviation. There is no
/// intercept: centring forces it to zero in standardized space and it
/// reappears as the energy mean on the way back.
struct RegressionModel {
    std::array<double, kNumAttributes> coefficients{};
    stats::StandardizationParams standardization;
    Provenance provenance = Provenance::fitted;
    std::optional<FitMetadata> fit;

    double coefficient(Attribute a) const { return coefficients[index_of(a)]; }

    /// Unclamped prediction in MW for a complete attribute vector.
    double predict_raw(const std::array<double, kNumAttributes>& attributes) const;

    /// Exactly seven finite coefficients and a valid standardization.
    void validate() const;
};

inline constexpr double kDefaultConditionBound = 1e8;

/// Solves R_xx * beta = r_xy from a correlation matrix, where R_xx is the
/// attribute-attribute block and r_xy the attribute-energy column.
///
/// With correlations of complete data this is ordinary least squares on
/// standardized variables: the normal equations Z'Z beta = Z'y divided by n
/// are exactly this system.
std::array<double, kNumAttributes> solve_correlation_system(const stats::CorrelationMatrix& corr,
                                                            double condition_bound = kDefaultConditionBound,
                                                            double* condition_number = nullptr);

/// Correlation-regression fit: correlation matrix of the data, then the solve above.
RegressionModel fit_correlation_regression(const dataio::AlignedDataset& data,
                                           double condition_bound = kDefaultConditionBound);

/// Coefficients of the published reference model, in attribute order.
inline constexpr std::array<double, kNumAttributes> kEq1Coefficients = {
    -0.84,  // temperature
    -0.96,  // cloud cover
    -0.89,  // air pressure
    0.71,   // wind speed
    -0.15,  // wind direction
    -0.78,  // precipitation
    -1.02,  // sunshine
};

/// The published reference model, applied in standardized space with the
/// caller's standardization parameters.
RegressionModel eq1_fixed_model(const stats::StandardizationParams& standardization);

struct Prediction {
    Timestamp timestamp{};
    double energy = 0.0;  // MW, >= 0
    bool clamped = false;
};

using PredictedEnergySeries = std::vector<Prediction>;

/// Predicts wind energy for each forecast record; negative values clamp to
/// 0 MW with `clamped` set. Throws DataError listing every record with
/// missing attributes, or when timestamps are not strictly increasing.
PredictedEnergySeries predict(const RegressionModel& model, const std::vector<dataio::WeatherRecord>& forecast);

void write_predictions_csv(std::ostream& out, const PredictedEnergySeries& series);
PredictedEnergySeries read_predictions_csv(std::istream& in);
PredictedEnergySeries load_predictions_csv(const std::filesystem::path& path);

struct Metrics {
    std::size_t rows = 0;
    double rmse = 0.0;
    double mae = 0.0;
    /// Empty when the correlation is undefined (constant predictions or truth).
    std::optional<double> pearson;
};

/// Error metrics of the clamped predictions over complete rows.
Metrics evaluate(const RegressionModel& model, const dataio::AlignedDataset& data);

nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const RegressionModel& m);
RegressionModel model_from_json(const nlohmann::json& j);

RegressionModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const RegressionModel& model);

}  // namespace greenwind::model
