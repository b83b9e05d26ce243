#include "greenwind/model.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "csv.hpp"

namespace greenwind::model {

namespace {

constexpr const char* kModelFormat = "greenwind-model/1";

std::array<double, kNumAttributes> attribute_vector(const dataio::WeatherRecord& r) {
    std::array<double, kNumAttributes> out{};
    for (std::size_t i = 0; i < kNumAttributes; ++i) out[i] = *r.values[i];
    return out;
}

}  // namespace

std::string to_string(Provenance p) {
    return p == Provenance::fitted ? "fitted" : "fixed-eq1";
}

double RegressionModel::predict_raw(const std::array<double, kNumAttributes>& attributes) const {
    double z = 0.0;
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
        z += coefficients[i] * standardization.to_standard(i + 1, attributes[i]);
    }
    return standardization.from_standard(0, z);
}

void RegressionModel::validate() const {
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
        if (!std::isfinite(coefficients[i])) {
            throw DataError("coefficient for " + std::string(kAttributeNames[i]) + " is not finite");
        }
    }
    standardization.validate();
}

std::array<double, kNumAttributes> solve_correlation_system(const stats::CorrelationMatrix& corr,
                                                            double condition_bound, double* condition_number) {
    corr.validate();
    Eigen::Matrix<double, kNumAttributes, kNumAttributes> rxx;
    Eigen::Matrix<double, kNumAttributes, 1> rxy;
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
        rxy(static_cast<Eigen::Index>(i)) = corr.at(i + 1, 0);
        for (std::size_t j = 0; j < kNumAttributes; ++j) {
            rxx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = corr.at(i + 1, j + 1);
        }
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(rxx)};
    const auto& sv = svd.singularValues();
    const double smin = sv(kNumAttributes - 1);
    const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
    if (condition_number) *condition_number = cond;
    if (!(cond <= condition_bound)) {
        std::size_t bi = 0, bj = 1;
        double worst = -1.0;
        for (std::size_t i = 0; i < kNumAttributes; ++i) {
            for (std::size_t j = i + 1; j < kNumAttributes; ++j) {
                const double v = std::abs(rxx(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
                if (v > worst) {
                    worst = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        std::ostringstream msg;
        msg << "attribute correlations are collinear (condition number " << cond << " exceeds " << condition_bound
            << "); most correlated pair: " << kAttributeNames[bi] << ", " << kAttributeNames[bj];
        throw CollinearityError(std::string(kAttributeNames[bi]), std::string(kAttributeNames[bj]), cond, msg.str());
    }

    const Eigen::Matrix<double, kNumAttributes, 1> beta = rxx.partialPivLu().solve(rxy);
    std::array<double, kNumAttributes> out{};
    for (std::size_t i = 0; i < kNumAttributes; ++i) out[i] = beta(static_cast<Eigen::Index>(i));
    return out;
}

RegressionModel fit_correlation_regression(const dataio::AlignedDataset& data, double condition_bound) {
    data.validate();
    const auto corr = stats::correlation_matrix(data);
    RegressionModel m;
    FitMetadata meta;
    meta.rows = data.size();
    meta.complete_rows = data.complete_rows();
    m.coefficients = solve_correlation_system(corr, condition_bound, &meta.condition_number);
    m.standardization = stats::standardize(data).params;
    m.provenance = Provenance::fitted;
    m.fit = meta;
    m.validate();
    return m;
}

RegressionModel eq1_fixed_model(const stats::StandardizationParams& standardization) {
    RegressionModel m;
    m.coefficients = kEq1Coefficients;
    m.standardization = standardization;
    m.provenance = Provenance::fixed_eq1;
    return m;
}

PredictedEnergySeries predict(const RegressionModel& model, const std::vector<dataio::WeatherRecord>& forecast) {
    model.validate();
    std::ostringstream problems;
    std::size_t bad = 0;
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        const auto missing = forecast[i].missing_fields();
        if (missing.empty()) continue;
        if (bad < 10) {
            problems << (bad ? "; " : "") << "record " << i << " (" << format_timestamp(forecast[i].timestamp)
                     << ") missing";
            for (const auto& f : missing) problems << ' ' << f;
        }
        ++bad;
    }
    if (bad) {
        throw DataError("forecast has " + std::to_string(bad) + " incomplete record(s), impute first: " +
                        problems.str() + (bad > 10 ? "; ..." : ""));
    }
    for (std::size_t i = 1; i < forecast.size(); ++i) {
        if (forecast[i].timestamp <= forecast[i - 1].timestamp) {
            throw DataError("forecast timestamps not strictly increasing at record " + std::to_string(i));
        }
    }

    PredictedEnergySeries out;
    out.reserve(forecast.size());
    for (const auto& r : forecast) {
        const double raw = model.predict_raw(attribute_vector(r));
        out.push_back({r.timestamp, raw < 0.0 ? 0.0 : raw, raw < 0.0});
    }
    return out;
}

void write_predictions_csv(std::ostream& out, const PredictedEnergySeries& series) {
    out << "timestamp,predicted_wind_energy,clamped\n";
    for (const auto& p : series) {
        out << format_timestamp(p.timestamp) << ',' << format_double(p.energy) << ',' << (p.clamped ? 1 : 0) << '\n';
    }
}

PredictedEnergySeries read_predictions_csv(std::istream& in) {
    dataio::CsvMapping mapping;
    mapping.columns.emplace("wind_energy", dataio::ColumnSpec{"predicted_wind_energy"});
    const auto records = dataio::read_energy_csv(in, mapping);
    PredictedEnergySeries out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].wind_energy) {
            throw DataError("prediction " + std::to_string(i) + " (" + format_timestamp(records[i].timestamp) +
                            ") has no value");
        }
        out.push_back({records[i].timestamp, *records[i].wind_energy, false});
    }
    return out;
}

PredictedEnergySeries load_predictions_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_predictions_csv(in);
}

Metrics evaluate(const RegressionModel& model, const dataio::AlignedDataset& data) {
    model.validate();
    std::vector<double> predicted, actual;
    for (const auto& row : data.rows) {
        if (!row.complete()) continue;
        std::array<double, kNumAttributes> attrs{};
        for (std::size_t i = 0; i < kNumAttributes; ++i) attrs[i] = *row.values[i + 1];
        const double raw = model.predict_raw(attrs);
        predicted.push_back(raw < 0.0 ? 0.0 : raw);
        actual.push_back(*row.values[0]);
    }
    if (predicted.size() < 2) {
        throw stats::InsufficientDataError("evaluate needs at least 2 complete rows, got " +
                                           std::to_string(predicted.size()));
    }
    Metrics m;
    m.rows = predicted.size();
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double e = predicted[i] - actual[i];
        se += e * e;
        ae += std::abs(e);
    }
    m.rmse = std::sqrt(se / static_cast<double>(m.rows));
    m.mae = ae / static_cast<double>(m.rows);
    try {
        m.pearson = stats::pearson(std::span<const double>(predicted), std::span<const double>(actual));
    } catch (const stats::UndefinedCorrelationError&) {
        m.pearson.reset();
    }
    return m;
}

nlohmann::json to_json(const Metrics& m) {
    nlohmann::json j = {{"rows", m.rows}, {"rmse", m.rmse}, {"mae", m.mae}};
    j["pearson"] = m.pearson ? nlohmann::json(*m.pearson) : nlohmann::json("undefined");
    return j;
}

nlohmann::json to_json(const RegressionModel& m) {
    std::vector<double> means, sds;
    for (const auto& v : m.standardization.variables) {
        means.push_back(v.mean);
        sds.push_back(v.stddev);
    }
    nlohmann::json j = {
        {"format", kModelFormat},
        {"provenance", to_string(m.provenance)},
        {"attributes", kAttributeNames},
        {"coefficients", m.coefficients},
        {"standardization", {{"variables", kVariableNames}, {"mean", means}, {"stddev", sds}}},
    };
    if (m.fit) {
        j["fit"] = {{"rows", m.fit->rows},
                    {"complete_rows", m.fit->complete_rows},
                    {"condition_number", m.fit->condition_number}};
    }
    return j;
}

RegressionModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) throw DataError("unsupported model format");
        RegressionModel m;
        const auto prov = j.at("provenance").get<std::string>();
        if (prov == "fitted") {
            m.provenance = Provenance::fitted;
        } else if (prov == "fixed-eq1") {
            m.provenance = Provenance::fixed_eq1;
        } else {
            throw DataError("unknown model provenance '" + prov + "'");
        }
        const auto attrs = j.at("attributes").get<std::vector<std::string>>();
        const auto coefs = j.at("coefficients").get<std::vector<double>>();
        if (attrs.size() != kNumAttributes || coefs.size() != kNumAttributes) {
            throw DataError("model must have exactly 7 attributes and coefficients");
        }
        for (std::size_t i = 0; i < kNumAttributes; ++i) {
            if (attrs[i] != kAttributeNames[i]) throw DataError("model attribute order mismatch at '" + attrs[i] + "'");
            m.coefficients[i] = coefs[i];
        }
        const auto& st = j.at("standardization");
        const auto vars = st.at("variables").get<std::vector<std::string>>();
        const auto means = st.at("mean").get<std::vector<double>>();
        const auto sds = st.at("stddev").get<std::vector<double>>();
        if (vars.size() != kNumVariables || means.size() != kNumVariables || sds.size() != kNumVariables) {
            throw DataError("model standardization must cover 8 variables");
        }
        for (std::size_t i = 0; i < kNumVariables; ++i) {
            if (vars[i] != kVariableNames[i]) throw DataError("standardization order mismatch at '" + vars[i] + "'");
            m.standardization.variables[i] = {means[i], sds[i]};
        }
        if (j.contains("fit")) {
            const auto& f = j.at("fit");
            m.fit = FitMetadata{f.at("rows").get<std::size_t>(), f.at("complete_rows").get<std::size_t>(),
                                f.at("condition_number").get<double>()};
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model JSON: ") + e.what());
    }
}

RegressionModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse '" + path.string() + "': " + e.what());
    }
    return model_from_json(j);
}

void save_model(const std::filesystem::path& path, const RegressionModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << to_json(model).dump(2) << '\n';
}

}  // namespace greenwind::model
