// Thin bridge over the C++ core. Structured values cross as JSON text; the
// Python package decodes them into dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "greenwind/dataio.hpp"
#include "greenwind/impute.hpp"
#include "greenwind/model.hpp"
#include "greenwind/sched.hpp"
#include "greenwind/stats.hpp"

namespace py = pybind11;
using namespace greenwind;
using nlohmann::json;

namespace {

using Column = std::vector<std::optional<double>>;

dataio::CsvMapping weather_mapping(const std::string& mapping_json) {
    const auto defaults = dataio::default_weather_mapping();
    return mapping_json.empty() ? defaults : dataio::mapping_from_json(json::parse(mapping_json), defaults);
}

dataio::CsvMapping energy_mapping(const std::string& mapping_json) {
    const auto defaults = dataio::default_energy_mapping();
    return mapping_json.empty() ? defaults : dataio::mapping_from_json(json::parse(mapping_json), defaults);
}

struct Dataset {
    dataio::AlignedDataset data;
    std::optional<dataio::JoinReport> report;
};

std::vector<sched::Job> jobs_of(const std::string& text) { return sched::jobs_from_json(json::parse(text)); }
sched::EnergyProfile profile_of(const std::string& text) { return sched::profile_from_json(json::parse(text)); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "greenwind C++ core";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto data_error = py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
    py::register_exception<LimitExceededError>(m, "LimitExceededError", base.ptr());
    (void)data_error;

    m.attr("variable_names") = std::vector<std::string>(kVariableNames.begin(), kVariableNames.end());
    m.attr("eq1_coefficients") = std::vector<double>(model::kEq1Coefficients.begin(), model::kEq1Coefficients.end());

    m.def(
        "pearson", [](const Column& x, const Column& y) { return stats::pearson(std::span(x), std::span(y)); },
        py::arg("x"), py::arg("y"));

    py::class_<Dataset>(m, "Dataset")
        .def_static(
            "load",
            [](const std::filesystem::path& weather, const std::filesystem::path& energy, std::int64_t tolerance,
               const std::string& weather_map, const std::string& energy_map) {
                auto res = dataio::align(dataio::load_weather_csv(weather, weather_mapping(weather_map)),
                                         dataio::load_energy_csv(energy, energy_mapping(energy_map)), tolerance);
                return Dataset{std::move(res.dataset), res.report};
            },
            py::arg("weather"), py::arg("energy"), py::arg("tolerance") = dataio::kDefaultAlignTolerance,
            py::arg("weather_mapping") = "", py::arg("energy_mapping") = "")
        .def_static(
            "read", [](const std::filesystem::path& path) { return Dataset{dataio::load_dataset_csv(path), {}}; },
            py::arg("path"))
        .def("__len__", [](const Dataset& d) { return d.data.size(); })
        .def_property_readonly("complete_rows", [](const Dataset& d) { return d.data.complete_rows(); })
        .def_property_readonly("timestamps",
                               [](const Dataset& d) {
                                   std::vector<std::string> out;
                                   for (const auto& r : d.data.rows) out.push_back(format_timestamp(r.timestamp));
                                   return out;
                               })
        .def(
            "column",
            [](const Dataset& d, const std::string& name) -> Column {
                for (std::size_t i = 0; i < kNumVariables; ++i) {
                    if (kVariableNames[i] == name) return d.data.column(i);
                }
                throw py::key_error(name);
            },
            py::arg("name"))
        .def("join_report_json",
             [](const Dataset& d) { return d.report ? dataio::to_json(*d.report).dump() : std::string("null"); })
        .def("to_csv", [](const Dataset& d) {
            std::ostringstream out;
            dataio::write_dataset_csv(out, d.data);
            return out.str();
        });

    m.def("correlation_json", [](const Dataset& d) { return stats::to_json(stats::correlation_matrix(d.data)).dump(); });
    m.def(
        "monthly_distribution_json",
        [](const Dataset& d, double bin_width) {
            return stats::to_json(stats::monthly_distribution(dataio::energy_of(d.data), bin_width)).dump();
        },
        py::arg("dataset"), py::arg("bin_width") = stats::kDefaultBinWidth);

    m.def(
        "solve_correlation_csv",
        [](const std::string& csv, double bound) {
            std::istringstream in(csv);
            double cond = 0.0;
            const auto beta = model::solve_correlation_system(stats::read_correlation_csv(in), bound, &cond);
            return py::make_tuple(std::vector<double>(beta.begin(), beta.end()), cond);
        },
        py::arg("csv"), py::arg("condition_bound") = model::kDefaultConditionBound);

    m.def(
        "fit_json",
        [](const Dataset& d, double bound) { return model::to_json(model::fit_correlation_regression(d.data, bound)).dump(); },
        py::arg("dataset"), py::arg("condition_bound") = model::kDefaultConditionBound);
    m.def("eq1_model_json",
          [](const Dataset& d) { return model::to_json(model::eq1_fixed_model(stats::standardize(d.data).params)).dump(); });
    m.def("evaluate_json", [](const std::string& model_json, const Dataset& d) {
        return model::to_json(model::evaluate(model::model_from_json(json::parse(model_json)), d.data)).dump();
    });
    m.def(
        "predict",
        [](const std::string& model_json, const std::filesystem::path& forecast, const std::string& mapping) {
            const auto series = model::predict(model::model_from_json(json::parse(model_json)),
                                               dataio::load_weather_csv(forecast, weather_mapping(mapping)));
            std::vector<std::tuple<std::string, double, bool>> out;
            for (const auto& p : series) out.emplace_back(format_timestamp(p.timestamp), p.energy, p.clamped);
            return out;
        },
        py::arg("model_json"), py::arg("forecast"), py::arg("mapping") = "");
    m.def(
        "predict_raw",
        [](const std::string& model_json, const std::array<double, kNumAttributes>& attributes) {
            return model::model_from_json(json::parse(model_json)).predict_raw(attributes);
        },
        py::arg("model_json"), py::arg("attributes"));

    m.def(
        "fit_gaussian_json",
        [](const std::vector<Column>& rows, std::vector<std::string> names) {
            return impute::to_json(impute::fit_gaussian(rows, std::move(names))).dump();
        },
        py::arg("rows"), py::arg("names"));
    m.def("fit_gaussian_dataset_json", [](const Dataset& d) { return impute::to_json(impute::fit_gaussian(d.data)).dump(); });
    m.def(
        "impute",
        [](const std::string& model_json, const Column& record) {
            const auto res = impute::impute(impute::gaussian_from_json(json::parse(model_json)), record);
            return py::make_tuple(res.values, res.imputed, res.degraded);
        },
        py::arg("model_json"), py::arg("record"));
    m.def("impute_dataset", [](const std::string& model_json, const Dataset& d) {
        auto res = impute::impute_dataset(impute::gaussian_from_json(json::parse(model_json)), d.data);
        std::vector<std::vector<bool>> flags;
        for (const auto& f : res.imputed) flags.emplace_back(f.begin(), f.end());
        return py::make_tuple(Dataset{std::move(res.data), {}}, flags, res.degraded_rows);
    });

    m.def(
        "schedule_cost",
        [](const std::map<std::string, int>& assignments, const std::string& jobs, const std::string& profile,
           double lambda) { return sched::cost(assignments, jobs_of(jobs), profile_of(profile), lambda); },
        py::arg("assignments"), py::arg("jobs_json"), py::arg("profile_json"), py::arg("lambda_") = sched::kDefaultLambda);
    m.def(
        "brute_force_json",
        [](const std::string& jobs, const std::string& profile, double lambda, std::uint64_t limit) {
            return sched::to_json(sched::brute_force(jobs_of(jobs), profile_of(profile), lambda, limit)).dump();
        },
        py::arg("jobs_json"), py::arg("profile_json"), py::arg("lambda_") = sched::kDefaultLambda,
        py::arg("limit") = sched::kDefaultBruteForceLimit);
    m.def(
        "greedy_json",
        [](const std::string& jobs, const std::string& profile, double lambda) {
            return sched::to_json(sched::greedy(jobs_of(jobs), profile_of(profile), lambda)).dump();
        },
        py::arg("jobs_json"), py::arg("profile_json"), py::arg("lambda_") = sched::kDefaultLambda);
    m.def(
        "randomized_greedy_json",
        [](const std::string& jobs, const std::string& profile, double lambda, std::uint64_t seed, std::size_t k) {
            return sched::to_json(sched::randomized_greedy(jobs_of(jobs), profile_of(profile), lambda, seed, k)).dump();
        },
        py::arg("jobs_json"), py::arg("profile_json"), py::arg("lambda_") = sched::kDefaultLambda,
        py::arg("seed") = 0, py::arg("k") = sched::kDefaultCandidates);
}
