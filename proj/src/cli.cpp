#include "greenwind/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "greenwind/impute.hpp"
#include "greenwind/model.hpp"
#include "greenwind/stats.hpp"

namespace greenwind::cli {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ostringstream buf;
    fn(buf);
    write_file(path, buf.str());
}

void write_json(const fs::path& path, const nlohmann::json& j) {
    write_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse '" + path.string() + "': " + e.what());
    }
}

Source source_from_json(const nlohmann::json& j, const fs::path& base, const dataio::CsvMapping& defaults) {
    Source s;
    if (j.is_string()) {
        s.path = resolve(base, j.get<std::string>());
        s.mapping = defaults;
        return s;
    }
    s.path = resolve(base, j.at("path").get<std::string>());
    s.mapping = j.contains("mapping") ? dataio::mapping_from_json(j.at("mapping"), defaults) : defaults;
    return s;
}

const Source& require(const std::optional<Source>& s, const char* what) {
    if (!s) throw UsageError(std::string("no ") + what + " input configured");
    return *s;
}

struct Loaded {
    dataio::AlignedDataset data;
    dataio::JoinReport report;
};

Loaded load_aligned(const PipelineConfig& config, std::ostream& log) {
    const auto& ws = require(config.weather, "weather");
    const auto& es = require(config.energy, "energy");
    const auto weather = dataio::load_weather_csv(ws.path, ws.mapping);
    const auto energy = dataio::load_energy_csv(es.path, es.mapping);
    auto aligned = dataio::align(weather, energy, config.align_tolerance);
    if (config.verbose) {
        log << "aligned " << aligned.report.matched << " rows (" << aligned.report.dropped() << " energy records dropped)\n";
    }
    return {std::move(aligned.dataset), aligned.report};
}

void check_constant_columns(const dataio::AlignedDataset& data) {
    for (std::size_t i = 0; i < kNumVariables; ++i) {
        const auto col = data.column(i);
        stats::describe(col, std::string(kVariableNames[i]));
    }
}

fs::path model_path(const PipelineConfig& c) { return c.model.value_or(c.out / "model.json"); }

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::greedy:
            return "greedy";
        case Algorithm::randomized_greedy:
            return "randomized_greedy";
        case Algorithm::brute_force:
            return "brute_force";
        case Algorithm::tree:
            return "tree";
    }
    return "greedy";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "greedy") return Algorithm::greedy;
    if (s == "randomized_greedy") return Algorithm::randomized_greedy;
    if (s == "brute_force") return Algorithm::brute_force;
    if (s == "tree") return Algorithm::tree;
    throw UsageError("unknown scheduling algorithm '" + s + "' (greedy, randomized_greedy, brute_force, tree)");
}

PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base) {
    PipelineConfig c;
    try {
        if (!j.is_object()) throw UsageError("config must be a JSON object");
        if (j.contains("weather")) c.weather = source_from_json(j.at("weather"), base, dataio::default_weather_mapping());
        if (j.contains("energy")) c.energy = source_from_json(j.at("energy"), base, dataio::default_energy_mapping());
        if (j.contains("forecast")) {
            c.forecast = source_from_json(j.at("forecast"), base,
                                          c.weather ? c.weather->mapping : dataio::default_weather_mapping());
        }
        c.align_tolerance = j.value("align_tolerance_seconds", c.align_tolerance);
        c.bin_width = j.value("bin_width", c.bin_width);
        c.circular_wind_direction = j.value("circular_wind_direction", false);
        c.condition_bound = j.value("condition_bound", c.condition_bound);
        if (j.contains("model")) c.model = resolve(base, j.at("model").get<std::string>());
        if (j.contains("out")) c.out = resolve(base, j.at("out").get<std::string>());
        c.verbose = j.value("verbose", false);

        if (j.contains("impute")) {
            const auto& im = j.at("impute");
            if (im.contains("input")) c.impute.input = resolve(base, im.at("input").get<std::string>());
            if (im.contains("model")) c.impute.model = resolve(base, im.at("model").get<std::string>());
            c.impute.in_place = im.value("in_place", false);
        }

        if (j.contains("schedule")) {
            const auto& s = j.at("schedule");
            auto& sc = c.schedule;
            if (s.contains("algorithm")) sc.algorithm = algorithm_from_string(s.at("algorithm").get<std::string>());
            sc.lambda = s.value("lambda", sc.lambda);
            sc.seed = s.value("seed", sc.seed);
            sc.k = s.value("k", sc.k);
            sc.limit = s.value("limit", sc.limit);
            sc.max_depth = s.value("max_depth", sc.max_depth);
            auto path_of = [&](const char* key, std::optional<fs::path>& dst) {
                if (s.contains(key)) dst = resolve(base, s.at(key).get<std::string>());
            };
            path_of("jobs", sc.jobs);
            path_of("profile", sc.profile);
            path_of("predictions", sc.predictions);
            path_of("scenarios", sc.scenarios);
            path_of("correlation", sc.correlation);
            if (s.contains("export_capacity")) sc.export_capacity = s.at("export_capacity").get<double>();
            if (s.contains("datacenter_cap")) sc.datacenter_cap = s.at("datacenter_cap").get<double>();
            if (s.contains("current_weather")) {
                AttributeValues w{};
                for (const auto& [key, value] : s.at("current_weather").items()) {
                    const auto a = attribute_from_name(key);
                    if (!a) throw UsageError("current_weather: unknown attribute '" + key + "'");
                    if (!value.is_null()) w[index_of(*a)] = value.get<double>();
                }
                sc.current_weather = w;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("invalid config: ") + e.what());
    } catch (const DataError& e) {
        throw UsageError(std::string("invalid config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config '" + path.string() + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("cannot parse config '" + path.string() + "': " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

void cmd_analyze(const PipelineConfig& config, std::ostream& log) {
    const auto loaded = load_aligned(config, log);
    check_constant_columns(loaded.data);
    const auto corr = stats::correlation_matrix(loaded.data);
    const auto dists = stats::monthly_distribution(dataio::energy_of(loaded.data), config.bin_width);

    const auto& out = config.out;
    write_json(out / "join_report.json", dataio::to_json(loaded.report));
    write_with(out / "correlation.csv", [&](std::ostream& o) { stats::write_correlation_csv(o, corr); });
    write_json(out / "correlation.json", stats::to_json(corr));
    write_with(out / "monthly_distribution.csv", [&](std::ostream& o) { stats::write_distribution_csv(o, dists); });
    write_with(out / "monthly_summary.csv", [&](std::ostream& o) { stats::write_distribution_summary_csv(o, dists); });
    write_json(out / "monthly_distribution.json", stats::to_json(dists));
    for (const auto& [x, y] : stats::plot_extract_pairs()) {
        const auto series = stats::plot_extract(loaded.data, x, y);
        write_with(out / "plots" / (series.file_stem() + ".csv"), [&](std::ostream& o) { stats::write_plot_csv(o, series); });
    }
    if (config.circular_wind_direction) {
        const auto comps = stats::direction_components(loaded.data);
        const auto energy = loaded.data.column(0);
        write_json(out / "circular_direction.json",
                   {{"wind_energy_vs_sin_direction", stats::pearson(energy, comps.sine)},
                    {"wind_energy_vs_cos_direction", stats::pearson(energy, comps.cosine)}});
    }
    if (config.verbose) log << "analyze: wrote correlation, distributions and plot data to " << out.string() << "\n";
}

void cmd_fit(const PipelineConfig& config, std::ostream& log) {
    const auto loaded = load_aligned(config, log);
    const auto fitted = model::fit_correlation_regression(loaded.data, config.condition_bound);
    const auto eq1 = model::eq1_fixed_model(fitted.standardization);
    const auto& out = config.out;
    fs::create_directories(out);
    model::save_model(out / "model.json", fitted);
    model::save_model(out / "eq1_model.json", eq1);
    write_json(out / "metrics.json",
               {{"fitted", model::to_json(model::evaluate(fitted, loaded.data))},
                {"eq1", model::to_json(model::evaluate(eq1, loaded.data))}});
    write_json(out / "join_report.json", dataio::to_json(loaded.report));

    const auto weather = dataio::weather_of(loaded.data);
    std::vector<dataio::WeatherRecord> complete;
    std::vector<double> actual;
    for (std::size_t i = 0; i < weather.size(); ++i) {
        if (!loaded.data.rows[i].complete()) continue;
        complete.push_back(weather[i]);
        actual.push_back(*loaded.data.rows[i].values[0]);
    }
    const auto predictions = model::predict(fitted, complete);
    write_with(out / "fitted.csv", [&](std::ostream& o) {
        o << "timestamp,wind_energy,fitted_wind_energy\n";
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            o << format_timestamp(predictions[i].timestamp) << ',' << format_double(actual[i]) << ','
              << format_double(predictions[i].energy) << '\n';
        }
    });
    if (config.verbose) log << "fit: condition number " << fitted.fit->condition_number << "\n";
}

void cmd_predict(const PipelineConfig& config, std::ostream& log) {
    const auto& fsrc = require(config.forecast, "forecast");
    const auto m = model::load_model(model_path(config));
    const auto forecast = dataio::load_weather_csv(fsrc.path, fsrc.mapping);
    const auto predictions = model::predict(m, forecast);
    write_with(config.out / "predictions.csv", [&](std::ostream& o) { model::write_predictions_csv(o, predictions); });
    if (config.verbose) {
        const auto clamped = std::count_if(predictions.begin(), predictions.end(), [](const auto& p) { return p.clamped; });
        log << "predict: " << predictions.size() << " predictions (" << clamped << " clamped at 0 MW)\n";
    }
}

void cmd_impute(const PipelineConfig& config, std::ostream& log) {
    const dataio::AlignedDataset data =
        config.impute.input ? dataio::load_dataset_csv(*config.impute.input) : load_aligned(config, log).data;
    impute::GaussianModel g;
    if (config.impute.model) {
        g = impute::load_gaussian(*config.impute.model);
    } else {
        g = impute::fit_gaussian(data);
        fs::create_directories(config.out);
        impute::save_gaussian(config.out / "gaussian_model.json", g);
    }
    const auto result = impute::impute_dataset(g, data);
    fs::path target = config.out / "imputed.csv";
    if (config.impute.in_place) {
        if (!config.impute.input) throw UsageError("--in-place needs an --input dataset file");
        target = *config.impute.input;
    }
    write_with(target, [&](std::ostream& o) { impute::write_imputed_csv(o, result); });
    if (result.degraded_rows > 0) {
        log << "warning: " << result.degraded_rows
            << " row(s) imputed from a rank-deficient observed covariance block\n";
    }
    if (config.verbose) {
        std::size_t filled = 0;
        for (const auto& flags : result.imputed) filled += static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
        log << "impute: filled " << filled << " value(s) in " << result.data.size() << " row(s)\n";
    }
}

void cmd_schedule(const PipelineConfig& config, std::ostream& log) {
    const auto& sc = config.schedule;
    if (!sc.jobs) throw UsageError("no jobs file configured");
    const auto jobs = sched::jobs_from_json(read_json(*sc.jobs));
    const auto& out = config.out;

    if (sc.algorithm == Algorithm::tree) {
        if (!sc.scenarios) throw UsageError("the tree algorithm needs a scenarios file");
        if (!sc.current_weather) throw UsageError("the tree algorithm needs current_weather");
        const auto scenarios = sched::scenarios_from_json(read_json(*sc.scenarios));
        const auto corr = stats::load_correlation_csv(sc.correlation.value_or(out / "correlation.csv"));
        const auto tree = sched::build_schedule_tree(scenarios, jobs, corr, sc.max_depth, sc.lambda);
        dataio::WeatherRecord current;
        current.values = *sc.current_weather;
        const auto leaf = sched::select_leaf(tree, current.values);
        const auto& chosen = tree.bank.at(leaf);
        write_json(out / "schedule_tree.json", sched::to_json(tree));
        auto doc = sched::to_json(chosen);
        doc["algorithm"] = "tree";
        doc["lambda"] = sc.lambda;
        doc["scenario"] = scenarios[leaf].name;
        write_json(out / "schedule.json", doc);
        write_with(out / "schedule.csv",
                   [&](std::ostream& o) { sched::write_schedule_csv(o, chosen, scenarios[leaf].profile); });
        if (config.verbose) log << "schedule: tree selected scenario '" << scenarios[leaf].name << "'\n";
        return;
    }

    sched::EnergyProfile profile;
    if (sc.profile) {
        profile = sched::profile_from_json(read_json(*sc.profile));
    } else {
        if (!sc.export_capacity || !sc.datacenter_cap) {
            throw UsageError("building a profile from predictions needs export_capacity and datacenter_cap");
        }
        const auto predictions = model::load_predictions_csv(sc.predictions.value_or(out / "predictions.csv"));
        profile = sched::profile_from_predictions(predictions, *sc.export_capacity, *sc.datacenter_cap);
    }

    sched::Schedule s;
    nlohmann::json params = {{"algorithm", to_string(sc.algorithm)}, {"lambda", sc.lambda}};
    switch (sc.algorithm) {
        case Algorithm::greedy:
            s = sched::greedy(jobs, profile, sc.lambda);
            break;
        case Algorithm::randomized_greedy:
            s = sched::randomized_greedy(jobs, profile, sc.lambda, sc.seed, sc.k);
            params["seed"] = sc.seed;
            params["k"] = sc.k;
            break;
        case Algorithm::brute_force:
            s = sched::brute_force(jobs, profile, sc.lambda, sc.limit);
            params["limit"] = sc.limit;
            break;
        case Algorithm::tree:
            break;
    }
    auto doc = sched::to_json(s);
    doc.update(params);
    write_json(out / "schedule.json", doc);
    write_with(out / "schedule.csv", [&](std::ostream& o) { sched::write_schedule_csv(o, s, profile); });
    if (config.verbose) log << "schedule: " << to_string(sc.algorithm) << " cost " << format_double(s.cost) << "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wind-energy prediction and green-aware job scheduling"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    std::string weather_path, energy_path, forecast_path, model_file;
    std::optional<std::int64_t> tolerance;
    app.add_option("--config", config_path, "Pipeline config (JSON)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--seed", seed, "Random seed for randomized scheduling");
    app.add_flag("--verbose,-v", verbose, "Progress messages on stderr");
    app.add_option("--weather", weather_path, "Weather CSV (canonical columns unless the config maps them)");
    app.add_option("--energy", energy_path, "Energy CSV");
    app.add_option("--tolerance", tolerance, "Alignment tolerance in seconds");

    auto* analyze = app.add_subcommand("analyze", "Correlation matrix, monthly distributions and plot data");
    std::optional<double> bin_width;
    analyze->add_option("--bin-width", bin_width, "Histogram bin width in MW");

    auto* fit = app.add_subcommand("fit", "Fit the correlation-regression model and compare with the reference model");
    std::optional<double> condition_bound;
    fit->add_option("--condition-bound", condition_bound, "Largest acceptable condition number");

    auto* predict = app.add_subcommand("predict", "Predict wind energy from a weather forecast");
    predict->add_option("--model", model_file, "Model JSON (default <out>/model.json)");
    predict->add_option("--forecast", forecast_path, "Forecast CSV");

    auto* imp = app.add_subcommand("impute", "Fill missing values by Gaussian conditional means");
    std::string impute_input, impute_model;
    bool in_place = false;
    imp->add_option("--input", impute_input, "Dataset CSV to fill (default: aligned weather + energy)");
    imp->add_option("--gaussian", impute_model, "Gaussian model JSON (default: fit on the input)");
    imp->add_flag("--in-place", in_place, "Overwrite the input file");

    auto* schedule = app.add_subcommand("schedule", "Schedule jobs against predicted green energy");
    std::string algorithm, jobs_path, profile_path, predictions_path, scenarios_path;
    std::optional<double> lambda, export_capacity, datacenter_cap;
    std::optional<std::size_t> k, max_depth;
    std::optional<std::uint64_t> limit;
    schedule->add_option("--algorithm", algorithm, "greedy | randomized_greedy | brute_force | tree");
    schedule->add_option("--lambda", lambda, "Curtailment weight");
    schedule->add_option("--k", k, "Candidate list size for randomized_greedy");
    schedule->add_option("--limit", limit, "Brute-force combination limit");
    schedule->add_option("--jobs", jobs_path, "Jobs JSON");
    schedule->add_option("--profile", profile_path, "Energy profile JSON");
    schedule->add_option("--predictions", predictions_path, "Predictions CSV used as the green profile");
    schedule->add_option("--export-capacity", export_capacity, "Transformer export capacity in MW");
    schedule->add_option("--datacenter-cap", datacenter_cap, "Datacenter power cap in MW");
    schedule->add_option("--scenarios", scenarios_path, "Scenario JSON for the tree algorithm");
    schedule->add_option("--max-depth", max_depth, "Schedule tree depth limit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    }

    try {
        PipelineConfig config;
        if (!config_path.empty()) config = load_config(config_path);
        if (!out_dir.empty()) config.out = out_dir;
        if (verbose) config.verbose = true;
        if (seed) config.schedule.seed = *seed;
        if (tolerance) config.align_tolerance = *tolerance;
        if (!weather_path.empty()) {
            config.weather = Source{weather_path, config.weather ? config.weather->mapping : dataio::default_weather_mapping()};
        }
        if (!energy_path.empty()) {
            config.energy = Source{energy_path, config.energy ? config.energy->mapping : dataio::default_energy_mapping()};
        }
        if (!forecast_path.empty()) {
            const auto mapping = config.forecast  ? config.forecast->mapping
                                 : config.weather ? config.weather->mapping
                                                  : dataio::default_weather_mapping();
            config.forecast = Source{forecast_path, mapping};
        }
        if (bin_width) config.bin_width = *bin_width;
        if (condition_bound) config.condition_bound = *condition_bound;
        if (!model_file.empty()) config.model = model_file;
        if (!impute_input.empty()) config.impute.input = impute_input;
        if (!impute_model.empty()) config.impute.model = impute_model;
        if (in_place) config.impute.in_place = true;
        auto& sc = config.schedule;
        if (!algorithm.empty()) sc.algorithm = algorithm_from_string(algorithm);
        if (lambda) sc.lambda = *lambda;
        if (k) sc.k = *k;
        if (limit) sc.limit = *limit;
        if (max_depth) sc.max_depth = *max_depth;
        if (export_capacity) sc.export_capacity = *export_capacity;
        if (datacenter_cap) sc.datacenter_cap = *datacenter_cap;
        if (!jobs_path.empty()) sc.jobs = jobs_path;
        if (!profile_path.empty()) sc.profile = profile_path;
        if (!predictions_path.empty()) sc.predictions = predictions_path;
        if (!scenarios_path.empty()) sc.scenarios = scenarios_path;

        if (*analyze) cmd_analyze(config, err);
        if (*fit) cmd_fit(config, err);
        if (*predict) cmd_predict(config, err);
        if (*imp) cmd_impute(config, err);
        if (*schedule) cmd_schedule(config, err);
        return kSuccess;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const LimitExceededError& e) {
        err << "limit exceeded: " << e.what() << "\n";
        return kInfeasible;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kDataError;
    }
}

}  // namespace greenwind::cli
