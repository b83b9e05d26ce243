#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "greenwind/model.hpp"
#include "greenwind/stats.hpp"

namespace greenwind::sched {

/// An assignment breaks a release, deadline, cap or completeness constraint.
class FeasibilityError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// Non-preemptive job drawing constant power for `duration` whole slots.
struct Job {
    std::string id;
    double power = 0.0;  // MW
    int duration = 1;    // slots
    int release = 0;     // earliest start slot
    std::optional<int> deadline;  // exclusive end slot; horizon when empty

    int deadline_or(int horizon) const { return deadline.value_or(horizon); }
};

struct EnergyProfile {
    std::vector<double> green;      // predicted green energy per slot, MW
    std::int64_t slot_seconds = 3600;
    double export_capacity = 0.0;   // transformer capacity C, MW
    double datacenter_cap = 1.0;    // P_max, MW
    std::optional<Timestamp> start; // wall-clock time of slot 0, when known

    int horizon() const { return static_cast<int>(green.size()); }
    void validate() const;
};

/// Job id -> start slot.
using Assignments = std::map<std::string, int>;

struct Schedule {
    Assignments assignments;
    double cost = 0.0;        // MW x slot
    std::vector<double> load; // P_t
};

inline constexpr double kDefaultLambda = 1.0;
inline constexpr std::uint64_t kDefaultBruteForceLimit = 1'000'000;
inline constexpr std::size_t kDefaultCandidates = 3;

/// Checks job fields against the profile horizon and id uniqueness (DataError).
void validate_jobs(const std::vector<Job>& jobs, const EnergyProfile& profile);

/// Per-slot load of a feasible assignment. Jobs are accumulated in id order.
std::vector<double> load_trace(const Assignments& assignments, const std::vector<Job>& jobs,
                               const EnergyProfile& profile);

/// Brown energy drawn plus lambda times curtailed green energy:
///   sum_t max(0, P_t - g_t) + lambda * max(0, g_t - P_t - C).
/// Throws FeasibilityError naming the violated constraint.
double cost(const Assignments& assignments, const std::vector<Job>& jobs, const EnergyProfile& profile,
            double lambda = kDefaultLambda);

/// Cost terms of one slot.
struct SlotBreakdown {
    double brown = 0.0;
    double curtailed = 0.0;
};
SlotBreakdown slot_breakdown(double load, double green, double export_capacity);

/// Number of start vectors an exhaustive search visits (saturating).
std::uint64_t combination_count(const std::vector<Job>& jobs, const EnergyProfile& profile);

/// Minimum-cost schedule over every feasible start vector. Ties go to the
/// lexicographically smallest start vector with jobs taken in id order.
/// Throws LimitExceededError above `limit` combinations and InfeasibleError
/// when nothing fits under the cap.
Schedule brute_force(const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda = kDefaultLambda,
                     std::uint64_t limit = kDefaultBruteForceLimit);

/// Places jobs in descending energy (power x duration, ties by id), each at
/// the feasible start with the lowest incremental cost (ties: earliest).
Schedule greedy(const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda = kDefaultLambda);

/// Greedy with a restricted candidate list: each job goes to one of its k
/// cheapest feasible starts, picked uniformly. Randomness comes from
/// std::mt19937_64 seeded with `seed` and rejection-sampled indices, so a
/// seed yields the same schedule on every platform. k = 1 is plain greedy.
Schedule randomized_greedy(const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda,
                           std::uint64_t seed, std::size_t k = kDefaultCandidates);

/// Green profile built from a prediction series (one slot per prediction).
EnergyProfile profile_from_predictions(const model::PredictedEnergySeries& predictions, double export_capacity,
                                       double datacenter_cap);

struct Scenario {
    std::string name;
    AttributeValues weather{};  // attributes left empty are never split on
    EnergyProfile profile;
};

struct TreeSplit {
    Attribute attribute{};
    double threshold = 0.0;  // value < threshold goes left
    std::size_t left = 0;
    std::size_t right = 0;
};

struct TreeLeaf {
    std::size_t schedule_id = 0;  // index of the scenario whose schedule it holds
};

using TreeNode = std::variant<TreeSplit, TreeLeaf>;

/// Binary tree over weather attributes whose leaves name precomputed schedules.
struct ScheduleTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::map<std::size_t, Schedule> bank;
    std::vector<std::string> scenario_names;
    std::vector<Attribute> attribute_order;

    std::size_t depth() const;
    std::size_t leaf_count() const;
};

/// Builds the selection tree.
///
/// Attributes are tried in descending |correlation with wind energy| (ties by
/// attribute order). A node splits on the first attribute not yet used on its
/// path that every scenario reaching it specifies and that is not constant
/// across them. The threshold is the median of that attribute over those
/// scenarios; if no scenario falls below the median, the next larger value
/// is used so both sides are non-empty. Nodes become leaves at max_depth,
/// with one scenario, or when no attribute separates the scenarios. A leaf
/// holds the greedy schedule of its lowest-index scenario.
ScheduleTree build_schedule_tree(const std::vector<Scenario>& scenarios, const std::vector<Job>& jobs,
                                 const stats::CorrelationMatrix& corr, std::size_t max_depth,
                                 double lambda = kDefaultLambda);

/// Schedule id reached by descending from the root.
std::size_t select_leaf(const ScheduleTree& tree, const AttributeValues& weather);
const Schedule& select_schedule(const ScheduleTree& tree, const dataio::WeatherRecord& current);

std::vector<Job> jobs_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<Job>& jobs);
EnergyProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EnergyProfile& p);
std::vector<Scenario> scenarios_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Schedule& s);
nlohmann::json to_json(const ScheduleTree& t);

/// slot,green,load,brown,curtailed (plus a timestamp column when the profile has a start).
void write_schedule_csv(std::ostream& out, const Schedule& s, const EnergyProfile& profile);

}  // namespace greenwind::sched
