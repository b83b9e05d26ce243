#include "greenwind/impute.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace greenwind::impute {

namespace {

constexpr const char* kGaussianFormat = "greenwind-gaussian/1";

// Pseudo-inverse of a symmetric positive semi-definite matrix; singular
// values below kPinvTolerance times the largest are treated as zero.
Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& a, bool& rank_deficient) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const Eigen::VectorXd& w = eig.eigenvalues();
    const double largest = w.cwiseAbs().maxCoeff();
    const double cutoff = kPinvTolerance * largest;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(w.size());
    rank_deficient = false;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (largest > 0.0 && w(i) > cutoff) {
            inv(i) = 1.0 / w(i);
        } else {
            rank_deficient = true;
        }
    }
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

// Keeps a filled value inside the domain the CSV loaders enforce.
double clip_to_domain(std::size_t variable, double v) {
    if (variable == 0) return std::max(v, 0.0);
    switch (static_cast<Attribute>(variable - 1)) {
        case Attribute::cloud_cover:
            return std::clamp(v, 0.0, 1.0);
        case Attribute::wind_direction: {
            double w = std::fmod(v, 360.0);
            if (w < 0.0) w += 360.0;
            return w >= 360.0 ? 0.0 : w;
        }
        case Attribute::wind_speed:
        case Attribute::precipitation:
        case Attribute::sunshine:
            return std::max(v, 0.0);
        default:
            return v;
    }
}

}  // namespace

void GaussianModel::validate() const {
    const auto d = mean.size();
    if (d == 0) throw DataError("gaussian model has no variables");
    if (static_cast<std::size_t>(d) != variables.size()) throw DataError("gaussian variable names do not match mean");
    if (covariance.rows() != d || covariance.cols() != d) throw DataError("gaussian covariance has wrong shape");
    if (!mean.allFinite() || !covariance.allFinite()) throw DataError("gaussian model has non-finite entries");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (covariance(i, i) < 0.0) throw DataError("gaussian covariance has a negative variance");
        for (Eigen::Index j = 0; j < i; ++j) {
            if (covariance(i, j) != covariance(j, i)) throw DataError("gaussian covariance is not symmetric");
        }
    }
}

std::size_t ImputedRecord::imputed_count() const {
    return static_cast<std::size_t>(std::count(imputed.begin(), imputed.end(), true));
}

GaussianModel fit_gaussian(const std::vector<std::vector<std::optional<double>>>& rows,
                           std::vector<std::string> variables) {
    const auto d = static_cast<Eigen::Index>(variables.size());
    if (d == 0) throw DataError("fit_gaussian needs at least one variable");
    std::vector<const std::vector<std::optional<double>>*> complete;
    for (const auto& r : rows) {
        if (r.size() != variables.size()) throw DataError("fit_gaussian: row width does not match variables");
        if (std::all_of(r.begin(), r.end(), [](const auto& v) { return v.has_value(); })) complete.push_back(&r);
    }
    const auto n = static_cast<Eigen::Index>(complete.size());
    if (n <= d) {
        throw DataError("fit_gaussian needs more than " + std::to_string(d) + " complete rows, got " +
                        std::to_string(n));
    }

    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = *(*complete[static_cast<std::size_t>(i)])[static_cast<std::size_t>(j)];
    }

    GaussianModel m;
    m.variables = std::move(variables);
    m.rows = static_cast<std::size_t>(n);
    m.mean = x.colwise().mean().transpose();
    const Eigen::MatrixXd centred = x.rowwise() - m.mean.transpose();
    m.covariance = (centred.transpose() * centred) / static_cast<double>(n - 1);
    // Exact symmetry; the product above is symmetric only up to rounding.
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) m.covariance(j, i) = m.covariance(i, j);
    }
    bool rank_deficient = false;
    pinv_psd(m.covariance, rank_deficient);
    m.singular = rank_deficient;
    return m;
}

GaussianModel fit_gaussian(const dataio::AlignedDataset& data) {
    std::vector<std::vector<std::optional<double>>> rows;
    rows.reserve(data.size());
    for (const auto& r : data.rows) rows.emplace_back(r.values.begin(), r.values.end());
    return fit_gaussian(rows, {kVariableNames.begin(), kVariableNames.end()});
}

ImputedRecord impute(const GaussianModel& model, std::span<const std::optional<double>> record) {
    const std::size_t d = model.dimension();
    if (record.size() != d) throw DataError("impute: record width does not match the model");

    ImputedRecord out;
    out.values.assign(d, 0.0);
    out.imputed.assign(d, false);
    std::vector<Eigen::Index> obs, mis;
    for (std::size_t i = 0; i < d; ++i) {
        if (record[i]) {
            out.values[i] = *record[i];
            obs.push_back(static_cast<Eigen::Index>(i));
        } else {
            mis.push_back(static_cast<Eigen::Index>(i));
        }
    }
    if (mis.empty()) return out;

    for (auto m : mis) {
        out.values[static_cast<std::size_t>(m)] = model.mean(m);
        out.imputed[static_cast<std::size_t>(m)] = true;
    }
    if (obs.empty()) return out;

    const Eigen::MatrixXd s_oo = model.covariance(obs, obs);
    const Eigen::MatrixXd s_mo = model.covariance(mis, obs);
    Eigen::VectorXd dev(static_cast<Eigen::Index>(obs.size()));
    for (std::size_t k = 0; k < obs.size(); ++k) {
        dev(static_cast<Eigen::Index>(k)) = *record[static_cast<std::size_t>(obs[k])] - model.mean(obs[k]);
    }
    bool rank_deficient = false;
    const Eigen::MatrixXd inv = pinv_psd(s_oo, rank_deficient);
    out.degraded = rank_deficient;
    const Eigen::VectorXd shift = s_mo * (inv * dev);
    for (std::size_t k = 0; k < mis.size(); ++k) {
        out.values[static_cast<std::size_t>(mis[k])] += shift(static_cast<Eigen::Index>(k));
    }
    return out;
}

ImputedDataset impute_dataset(const GaussianModel& model, const dataio::AlignedDataset& data) {
    if (model.dimension() != kNumVariables) throw DataError("dataset imputation needs an 8-variable model");
    for (std::size_t i = 0; i < kNumVariables; ++i) {
        if (model.variables[i] != kVariableNames[i]) {
            throw DataError("gaussian model variable " + std::to_string(i) + " is '" + model.variables[i] + "'");
        }
    }
    ImputedDataset out;
    out.data = data;
    out.imputed.reserve(data.size());
    for (auto& row : out.data.rows) {
        const auto filled = impute(model, row.values);
        std::array<bool, kNumVariables> flags{};
        for (std::size_t i = 0; i < kNumVariables; ++i) {
            flags[i] = filled.imputed[i];
            row.values[i] = flags[i] ? clip_to_domain(i, filled.values[i]) : filled.values[i];
        }
        out.imputed.push_back(flags);
        if (filled.degraded && filled.imputed_count() > 0) ++out.degraded_rows;
    }
    return out;
}

void write_imputed_csv(std::ostream& out, const ImputedDataset& result) {
    out << "timestamp";
    for (auto name : kVariableNames) out << ',' << name;
    for (auto name : kVariableNames) out << ',' << name << "_imputed";
    out << '\n';
    for (std::size_t r = 0; r < result.data.size(); ++r) {
        const auto& row = result.data.rows[r];
        out << format_timestamp(row.timestamp);
        for (const auto& v : row.values) {
            out << ',';
            if (v) out << format_double(*v);
        }
        for (bool f : result.imputed[r]) out << ',' << (f ? 1 : 0);
        out << '\n';
    }
}

nlohmann::json to_json(const GaussianModel& m) {
    std::vector<double> mean(m.mean.data(), m.mean.data() + m.mean.size());
    std::vector<std::vector<double>> cov;
    for (Eigen::Index i = 0; i < m.covariance.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index j = 0; j < m.covariance.cols(); ++j) row.push_back(m.covariance(i, j));
        cov.push_back(std::move(row));
    }
    return {{"format", kGaussianFormat}, {"variables", m.variables}, {"mean", mean},
            {"covariance", cov},         {"rows", m.rows},           {"singular", m.singular}};
}

GaussianModel gaussian_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kGaussianFormat) throw DataError("unsupported gaussian model format");
        GaussianModel m;
        m.variables = j.at("variables").get<std::vector<std::string>>();
        const auto mean = j.at("mean").get<std::vector<double>>();
        const auto cov = j.at("covariance").get<std::vector<std::vector<double>>>();
        const auto d = static_cast<Eigen::Index>(mean.size());
        m.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), d);
        m.covariance.resize(d, d);
        if (static_cast<Eigen::Index>(cov.size()) != d) throw DataError("gaussian covariance has wrong shape");
        for (Eigen::Index i = 0; i < d; ++i) {
            const auto& row = cov[static_cast<std::size_t>(i)];
            if (static_cast<Eigen::Index>(row.size()) != d) throw DataError("gaussian covariance has wrong shape");
            for (Eigen::Index k = 0; k < d; ++k) m.covariance(i, k) = row[static_cast<std::size_t>(k)];
        }
        m.rows = j.value("rows", std::size_t{0});
        m.singular = j.value("singular", false);
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed gaussian model JSON: ") + e.what());
    }
}

GaussianModel load_gaussian(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse '" + path.string() + "': " + e.what());
    }
    return gaussian_from_json(j);
}

void save_gaussian(const std::filesystem::path& path, const GaussianModel& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << to_json(m).dump(2) << '\n';
}

}  // namespace greenwind::impute
