#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "greenwind/dataio.hpp"
#include "greenwind/sched.hpp"

namespace greenwind::cli {

/// Bad invocation or configuration (exit code 1).
class UsageError : public Error {
public:
    using Error::Error;
};

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 1,
    kDataError = 2,
    kInfeasible = 3,
};

struct Source {
    std::filesystem::path path;
    dataio::CsvMapping mapping;
};

enum class Algorithm { greedy, randomized_greedy, brute_force, tree };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct ScheduleConfig {
    Algorithm algorithm = Algorithm::greedy;
    double lambda = sched::kDefaultLambda;
    std::uint64_t seed = 0;
    std::size_t k = sched::kDefaultCandidates;
    std::uint64_t limit = sched::kDefaultBruteForceLimit;
    std::optional<std::filesystem::path> jobs;
    std::optional<std::filesystem::path> profile;      // used instead of predictions when set
    std::optional<std::filesystem::path> predictions;  // default <out>/predictions.csv
    std::optional<double> export_capacity;
    std::optional<double> datacenter_cap;
    std::optional<std::filesystem::path> scenarios;
    std::optional<std::filesystem::path> correlation;  // default <out>/correlation.csv
    std::size_t max_depth = 3;
    std::optional<AttributeValues> current_weather;
};

struct ImputeConfig {
    std::optional<std::filesystem::path> input;  // dataset CSV; default: aligned weather + energy
    std::optional<std::filesystem::path> model;  // gaussian model JSON; default: fit on the input
    bool in_place = false;
};

/// Everything a pipeline run needs. Relative paths in a config file are
/// resolved against the file's directory.
struct PipelineConfig {
    std::optional<Source> weather;
    std::optional<Source> energy;
    std::optional<Source> forecast;
    std::int64_t align_tolerance = dataio::kDefaultAlignTolerance;
    double bin_width = stats::kDefaultBinWidth;
    bool circular_wind_direction = false;
    double condition_bound = model::kDefaultConditionBound;
    std::optional<std::filesystem::path> model;  // default <out>/model.json
    ImputeConfig impute;
    ScheduleConfig schedule;
    std::filesystem::path out = "out";
    bool verbose = false;
};

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// Each command writes its artifacts under config.out; `log` receives progress
// lines when config.verbose is set.
void cmd_analyze(const PipelineConfig& config, std::ostream& log);
void cmd_fit(const PipelineConfig& config, std::ostream& log);
void cmd_predict(const PipelineConfig& config, std::ostream& log);
void cmd_impute(const PipelineConfig& config, std::ostream& log);
void cmd_schedule(const PipelineConfig& config, std::ostream& log);

/// Parses arguments, runs one subcommand and maps errors onto exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace greenwind::cli
