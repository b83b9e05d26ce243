#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "greenwind/dataio.hpp"

namespace greenwind::impute {

/// Multivariate normal over a fixed list of variables.
struct GaussianModel {
    std::vector<std::string> variables;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // sample covariance (n - 1 denominator)
    std::size_t rows = 0;        // complete rows used for the fit
    /// Covariance is numerically rank deficient (allowed; imputation uses a pseudo-inverse).
    bool singular = false;

    std::size_t dimension() const { return static_cast<std::size_t>(mean.size()); }
    void validate() const;
};

/// Relative singular-value cutoff for the observed-block pseudo-inverse.
inline constexpr double kPinvTolerance = 1e-10;

/// Mean and sample covariance over complete rows only. Needs more complete
/// rows than dimensions.
GaussianModel fit_gaussian(const std::vector<std::vector<std::optional<double>>>& rows,
                           std::vector<std::string> variables);

/// Fit over the eight dataset variables (wind energy and attributes).
GaussianModel fit_gaussian(const dataio::AlignedDataset& data);

struct ImputedRecord {
    std::vector<double> values;
    std::vector<bool> imputed;
    /// Observed covariance block was rank deficient; fills used its pseudo-inverse.
    bool degraded = false;

    std::size_t imputed_count() const;
};

/// Fills each missing field with its conditional mean given the observed
/// ones, mu_m + S_mo * pinv(S_oo) * (x_o - mu_o). Observed fields are
/// returned untouched. With nothing observed the marginal means are used.
ImputedRecord impute(const GaussianModel& model, std::span<const std::optional<double>> record);

struct ImputedDataset {
    dataio::AlignedDataset data;
    std::vector<std::array<bool, kNumVariables>> imputed;
    std::size_t degraded_rows = 0;
};

/// Imputes every row of a dataset with an eight-variable model. Filled values
/// are clipped to their field's valid range (energy and speeds non-negative,
/// cloud cover in [0, 1], wind direction wrapped into [0, 360)).
ImputedDataset impute_dataset(const GaussianModel& model, const dataio::AlignedDataset& data);

/// Dataset CSV followed by one 0/1 "<variable>_imputed" column per variable.
void write_imputed_csv(std::ostream& out, const ImputedDataset& result);

nlohmann::json to_json(const GaussianModel& m);
GaussianModel gaussian_from_json(const nlohmann::json& j);
GaussianModel load_gaussian(const std::filesystem::path& path);
void save_gaussian(const std::filesystem::path& path, const GaussianModel& m);

}  // namespace greenwind::impute
