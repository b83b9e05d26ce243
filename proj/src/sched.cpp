#include "greenwind/sched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

namespace greenwind::sched {

namespace {

double slot_cost(double load, double green, double export_capacity, double lambda) {
    return std::max(0.0, load - green) + lambda * std::max(0.0, green - load - export_capacity);
}

double total_cost(const std::vector<double>& load, const EnergyProfile& profile, double lambda) {
    double c = 0.0;
    for (std::size_t t = 0; t < load.size(); ++t) c += slot_cost(load[t], profile.green[t], profile.export_capacity, lambda);
    return c;
}

void check_lambda(double lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0) throw DataError("lambda must be finite and non-negative");
}

/// Indices of `jobs` sorted by id.
std::vector<std::size_t> id_order(const std::vector<Job>& jobs) {
    std::vector<std::size_t> order(jobs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return jobs[a].id < jobs[b].id; });
    return order;
}

std::vector<double> trace_in_id_order(const std::vector<Job>& jobs, const std::vector<std::size_t>& order,
                                      const std::vector<int>& starts, int horizon) {
    std::vector<double> load(static_cast<std::size_t>(horizon), 0.0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Job& j = jobs[order[k]];
        for (int t = starts[k]; t < starts[k] + j.duration; ++t) load[static_cast<std::size_t>(t)] += j.power;
    }
    return load;
}

Schedule finish(Assignments assignments, const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda) {
    Schedule s;
    s.assignments = std::move(assignments);
    s.load = load_trace(s.assignments, jobs, profile);
    s.cost = cost(s.assignments, jobs, profile, lambda);
    return s;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    // Rejection sampling keeps the draw unbiased and independent of the
    // standard library's distribution implementation.
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % range);
}

struct Candidate {
    double delta;
    int start;
};

Schedule greedy_impl(const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda, std::size_t k,
                     std::mt19937_64* rng) {
    profile.validate();
    validate_jobs(jobs, profile);
    check_lambda(lambda);
    std::vector<std::size_t> order(jobs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ea = jobs[a].power * jobs[a].duration;
        const double eb = jobs[b].power * jobs[b].duration;
        if (ea != eb) return ea > eb;
        return jobs[a].id < jobs[b].id;
    });

    const double cap = profile.datacenter_cap;
    std::vector<double> load(profile.green.size(), 0.0);
    Assignments assignments;
    std::vector<Candidate> candidates;
    for (std::size_t idx : order) {
        const Job& job = jobs[idx];
        candidates.clear();
        const int last = job.deadline_or(profile.horizon()) - job.duration;
        for (int s = job.release; s <= last; ++s) {
            bool fits = true;
            double delta = 0.0;
            for (int t = s; t < s + job.duration; ++t) {
                const auto u = static_cast<std::size_t>(t);
                const double after = load[u] + job.power;
                if (after > cap) {
                    fits = false;
                    break;
                }
                delta += slot_cost(after, profile.green[u], profile.export_capacity, lambda) -
                         slot_cost(load[u], profile.green[u], profile.export_capacity, lambda);
            }
            if (fits) candidates.push_back({delta, s});
        }
        if (candidates.empty()) {
            throw InfeasibleError("job '" + job.id + "' has no feasible start given prior placements");
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) { return a.delta < b.delta; });
        std::size_t pick = 0;
        const std::size_t pool = std::min(k, candidates.size());
        if (rng && pool > 1) pick = uniform_index(*rng, pool);
        const int start = candidates[pick].start;
        for (int t = start; t < start + job.duration; ++t) load[static_cast<std::size_t>(t)] += job.power;
        assignments[job.id] = start;
    }
    return finish(std::move(assignments), jobs, profile, lambda);
}

std::optional<double> number_or_null(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

void EnergyProfile::validate() const {
    if (green.empty()) throw DataError("energy profile has no slots");
    for (std::size_t t = 0; t < green.size(); ++t) {
        if (!std::isfinite(green[t]) || green[t] < 0.0) {
            throw DataError("green energy at slot " + std::to_string(t) + " must be finite and >= 0");
        }
    }
    if (!std::isfinite(export_capacity) || export_capacity < 0.0) throw DataError("export capacity must be >= 0");
    if (!std::isfinite(datacenter_cap) || !(datacenter_cap > 0.0)) throw DataError("datacenter cap must be > 0");
    if (slot_seconds <= 0) throw DataError("slot length must be positive");
}

void validate_jobs(const std::vector<Job>& jobs, const EnergyProfile& profile) {
    std::set<std::string> ids;
    for (const auto& j : jobs) {
        if (!ids.insert(j.id).second) throw DataError("duplicate job id '" + j.id + "'");
        if (!std::isfinite(j.power) || !(j.power > 0.0)) throw DataError("job '" + j.id + "': power must be > 0");
        if (j.duration < 1) throw DataError("job '" + j.id + "': duration must be >= 1 slot");
        if (j.release < 0) throw DataError("job '" + j.id + "': release must be >= 0");
        const int deadline = j.deadline_or(profile.horizon());
        if (deadline > profile.horizon()) throw DataError("job '" + j.id + "': deadline beyond the profile horizon");
        if (j.release + j.duration > deadline) {
            throw DataError("job '" + j.id + "': release + duration exceeds deadline");
        }
    }
}

std::vector<double> load_trace(const Assignments& assignments, const std::vector<Job>& jobs,
                               const EnergyProfile& profile) {
    profile.validate();
    validate_jobs(jobs, profile);
    const auto order = id_order(jobs);
    if (assignments.size() != jobs.size()) {
        for (const auto& [id, start] : assignments) {
            if (std::none_of(jobs.begin(), jobs.end(), [&](const Job& j) { return j.id == id; })) {
                throw FeasibilityError("assignment names unknown job '" + id + "'");
            }
        }
    }
    std::vector<int> starts;
    for (std::size_t idx : order) {
        const Job& j = jobs[idx];
        const auto it = assignments.find(j.id);
        if (it == assignments.end()) throw FeasibilityError("job '" + j.id + "' is not assigned");
        const int s = it->second;
        if (s < j.release) throw FeasibilityError("job '" + j.id + "' starts before its release slot");
        if (s + j.duration > j.deadline_or(profile.horizon())) {
            throw FeasibilityError("job '" + j.id + "' ends after its deadline");
        }
        starts.push_back(s);
    }
    auto load = trace_in_id_order(jobs, order, starts, profile.horizon());
    for (std::size_t t = 0; t < load.size(); ++t) {
        if (load[t] > profile.datacenter_cap) {
            throw FeasibilityError("load " + format_double(load[t]) + " MW at slot " + std::to_string(t) +
                                   " exceeds the datacenter cap");
        }
    }
    return load;
}

double cost(const Assignments& assignments, const std::vector<Job>& jobs, const EnergyProfile& profile,
            double lambda) {
    check_lambda(lambda);
    return total_cost(load_trace(assignments, jobs, profile), profile, lambda);
}

SlotBreakdown slot_breakdown(double load, double green, double export_capacity) {
    return {std::max(0.0, load - green), std::max(0.0, green - load - export_capacity)};
}

std::uint64_t combination_count(const std::vector<Job>& jobs, const EnergyProfile& profile) {
    std::uint64_t count = 1;
    for (const auto& j : jobs) {
        const auto options = static_cast<std::uint64_t>(j.deadline_or(profile.horizon()) - j.duration - j.release + 1);
        if (options != 0 && count > std::numeric_limits<std::uint64_t>::max() / options) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        count *= options;
    }
    return count;
}

Schedule brute_force(const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda, std::uint64_t limit) {
    profile.validate();
    validate_jobs(jobs, profile);
    check_lambda(lambda);
    const std::uint64_t combos = combination_count(jobs, profile);
    if (combos > limit) {
        throw LimitExceededError("brute force would enumerate " +
                                 (combos == std::numeric_limits<std::uint64_t>::max() ? std::string("more than 2^64")
                                                                                      : std::to_string(combos)) +
                                 " schedules, above the limit of " + std::to_string(limit));
    }

    const auto order = id_order(jobs);
    const std::size_t n = order.size();
    const int horizon = profile.horizon();
    std::vector<int> starts(n, 0);
    std::vector<int> best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<double> load(static_cast<std::size_t>(horizon), 0.0);

    // Depth-first in id order with ascending starts visits start vectors in
    // lexicographic order; only a strictly lower cost replaces the incumbent.
    // Loads are rebuilt per level from a snapshot so every leaf sums its
    // powers in id order, exactly as cost() does.
    std::vector<std::vector<double>> snapshots(n + 1);
    snapshots[0] = load;
    auto visit = [&](auto&& self, std::size_t depth) -> void {
        if (depth == n) {
            const double c = total_cost(snapshots[n], profile, lambda);
            if (c < best_cost) {
                best_cost = c;
                best = starts;
            }
            return;
        }
        const Job& job = jobs[order[depth]];
        const int last = job.deadline_or(horizon) - job.duration;
        for (int s = job.release; s <= last; ++s) {
            snapshots[depth + 1] = snapshots[depth];
            auto& next = snapshots[depth + 1];
            bool fits = true;
            for (int t = s; t < s + job.duration; ++t) {
                next[static_cast<std::size_t>(t)] += job.power;
                if (next[static_cast<std::size_t>(t)] > profile.datacenter_cap) {
                    fits = false;
                    break;
                }
            }
            if (!fits) continue;
            starts[depth] = s;
            self(self, depth + 1);
        }
    };
    visit(visit, 0);

    if (best.size() != n) throw InfeasibleError("no feasible schedule exists under the datacenter cap");
    Assignments assignments;
    for (std::size_t k = 0; k < n; ++k) assignments[jobs[order[k]].id] = best[k];
    return finish(std::move(assignments), jobs, profile, lambda);
}

Schedule greedy(const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda) {
    return greedy_impl(jobs, profile, lambda, 1, nullptr);
}

Schedule randomized_greedy(const std::vector<Job>& jobs, const EnergyProfile& profile, double lambda,
                           std::uint64_t seed, std::size_t k) {
    if (k < 1) throw DataError("candidate list size k must be >= 1");
    std::mt19937_64 rng(seed);
    return greedy_impl(jobs, profile, lambda, k, &rng);
}

EnergyProfile profile_from_predictions(const model::PredictedEnergySeries& predictions, double export_capacity,
                                       double datacenter_cap) {
    EnergyProfile p;
    p.export_capacity = export_capacity;
    p.datacenter_cap = datacenter_cap;
    for (const auto& pr : predictions) p.green.push_back(pr.energy);
    if (!predictions.empty()) {
        p.start = predictions.front().timestamp;
        if (predictions.size() > 1) {
            p.slot_seconds = (predictions[1].timestamp - predictions[0].timestamp).count();
            for (std::size_t i = 2; i < predictions.size(); ++i) {
                if ((predictions[i].timestamp - predictions[i - 1].timestamp).count() != p.slot_seconds) {
                    throw DataError("prediction timestamps are not evenly spaced at " +
                                    format_timestamp(predictions[i].timestamp));
                }
            }
        }
    }
    p.validate();
    return p;
}

std::size_t ScheduleTree::depth() const {
    auto walk = [&](auto&& self, std::size_t node) -> std::size_t {
        if (const auto* s = std::get_if<TreeSplit>(&nodes.at(node))) {
            return 1 + std::max(self(self, s->left), self(self, s->right));
        }
        return 0;
    };
    return nodes.empty() ? 0 : walk(walk, 0);
}

std::size_t ScheduleTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return std::holds_alternative<TreeLeaf>(n); }));
}

ScheduleTree build_schedule_tree(const std::vector<Scenario>& scenarios, const std::vector<Job>& jobs,
                                 const stats::CorrelationMatrix& corr, std::size_t max_depth, double lambda) {
    if (scenarios.empty()) throw DataError("schedule tree needs at least one scenario");
    corr.validate();

    ScheduleTree tree;
    for (std::size_t i = 0; i < kNumAttributes; ++i) tree.attribute_order.push_back(static_cast<Attribute>(i));
    std::stable_sort(tree.attribute_order.begin(), tree.attribute_order.end(), [&](Attribute a, Attribute b) {
        return std::abs(corr.energy_correlation(a)) > std::abs(corr.energy_correlation(b));
    });
    for (const auto& s : scenarios) tree.scenario_names.push_back(s.name);

    auto build = [&](auto&& self, std::vector<std::size_t> members, std::size_t depth,
                     std::vector<Attribute> used) -> std::size_t {
        const std::size_t id = tree.nodes.size();
        tree.nodes.emplace_back(TreeLeaf{members.front()});
        if (depth >= max_depth || members.size() == 1) return id;

        for (Attribute a : tree.attribute_order) {
            if (std::find(used.begin(), used.end(), a) != used.end()) continue;
            std::vector<double> values;
            for (std::size_t m : members) {
                const auto& v = scenarios[m].weather[index_of(a)];
                if (!v) break;
                values.push_back(*v);
            }
            if (values.size() != members.size()) continue;
            std::vector<double> sorted = values;
            std::sort(sorted.begin(), sorted.end());
            if (sorted.front() == sorted.back()) continue;

            const std::size_t n = sorted.size();
            double threshold = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
            if (!(sorted.front() < threshold)) threshold = *std::upper_bound(sorted.begin(), sorted.end(), threshold);

            std::vector<std::size_t> left, right;
            for (std::size_t k = 0; k < members.size(); ++k) (values[k] < threshold ? left : right).push_back(members[k]);
            used.push_back(a);
            const std::size_t l = self(self, left, depth + 1, used);
            const std::size_t r = self(self, right, depth + 1, used);
            tree.nodes[id] = TreeSplit{a, threshold, l, r};
            return id;
        }
        return id;
    };
    std::vector<std::size_t> all(scenarios.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    build(build, all, 0, {});

    for (const auto& node : tree.nodes) {
        if (const auto* leaf = std::get_if<TreeLeaf>(&node)) {
            if (!tree.bank.contains(leaf->schedule_id)) {
                tree.bank.emplace(leaf->schedule_id, greedy(jobs, scenarios[leaf->schedule_id].profile, lambda));
            }
        }
    }
    return tree;
}

std::size_t select_leaf(const ScheduleTree& tree, const AttributeValues& weather) {
    if (tree.nodes.empty()) throw DataError("schedule tree is empty");
    std::size_t node = 0;
    while (const auto* split = std::get_if<TreeSplit>(&tree.nodes.at(node))) {
        const auto& v = weather[index_of(split->attribute)];
        if (!v) throw DataError("current weather lacks " + std::string(name_of(split->attribute)) + ", needed by the schedule tree");
        node = *v < split->threshold ? split->left : split->right;
    }
    return std::get<TreeLeaf>(tree.nodes[node]).schedule_id;
}

const Schedule& select_schedule(const ScheduleTree& tree, const dataio::WeatherRecord& current) {
    const auto id = select_leaf(tree, current.values);
    const auto it = tree.bank.find(id);
    if (it == tree.bank.end()) throw DataError("schedule tree leaf refers to missing schedule " + std::to_string(id));
    return it->second;
}

std::vector<Job> jobs_from_json(const nlohmann::json& j) {
    const nlohmann::json& arr = j.is_object() ? j.at("jobs") : j;
    if (!arr.is_array()) throw DataError("jobs document must be an array or an object with a \"jobs\" array");
    std::vector<Job> jobs;
    try {
        for (const auto& e : arr) {
            Job job;
            job.id = e.at("id").get<std::string>();
            job.power = e.at("power").get<double>();
            job.duration = e.value("duration", 1);
            job.release = e.value("release", 0);
            if (e.contains("deadline") && !e.at("deadline").is_null()) job.deadline = e.at("deadline").get<int>();
            jobs.push_back(std::move(job));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("malformed jobs JSON: ") + ex.what());
    }
    return jobs;
}

nlohmann::json to_json(const std::vector<Job>& jobs) {
    auto arr = nlohmann::json::array();
    for (const auto& job : jobs) {
        nlohmann::json e = {{"id", job.id}, {"power", job.power}, {"duration", job.duration}, {"release", job.release}};
        if (job.deadline) e["deadline"] = *job.deadline;
        arr.push_back(e);
    }
    return {{"jobs", arr}};
}

EnergyProfile profile_from_json(const nlohmann::json& j) {
    EnergyProfile p;
    try {
        p.green = j.at("green").get<std::vector<double>>();
        p.slot_seconds = j.value("slot_seconds", std::int64_t{3600});
        p.export_capacity = j.at("export_capacity").get<double>();
        p.datacenter_cap = j.at("datacenter_cap").get<double>();
        if (j.contains("start") && !j.at("start").is_null()) {
            p.start = dataio::parse_timestamp(j.at("start").get<std::string>(), dataio::TimestampFormat::iso8601);
        }
    } catch (const nlohmann::json::exception& ex) {
        throw DataError(std::string("malformed profile JSON: ") + ex.what());
    }
    p.validate();
    return p;
}

nlohmann::json to_json(const EnergyProfile& p) {
    nlohmann::json j = {{"green", p.green},
                        {"slot_seconds", p.slot_seconds},
                        {"export_capacity", p.export_capacity},
                        {"datacenter_cap", p.datacenter_cap}};
    if (p.start) j["start"] = format_timestamp(*p.start);
    return j;
}

std::vector<Scenario> scenarios_from_json(const nlohmann::json& j) {
    const nlohmann::json& arr = j.is_object() ? j.at("scenarios") : j;
    if (!arr.is_array()) throw DataError("scenarios document must be an array or an object with a \"scenarios\" array");
    std::vector<Scenario> out;
    for (const auto& e : arr) {
        Scenario s;
        s.name = e.value("name", "scenario_" + std::to_string(out.size()));
        if (e.contains("weather")) {
            for (const auto& [key, value] : e.at("weather").items()) {
                const auto a = attribute_from_name(key);
                if (!a) throw DataError("scenario '" + s.name + "': unknown attribute '" + key + "'");
                s.weather[index_of(*a)] = number_or_null(e.at("weather"), key.c_str());
            }
        }
        if (!e.contains("profile")) throw DataError("scenario '" + s.name + "' has no profile");
        s.profile = profile_from_json(e.at("profile"));
        out.push_back(std::move(s));
    }
    return out;
}

nlohmann::json to_json(const Schedule& s) {
    nlohmann::json assignments = nlohmann::json::object();
    for (const auto& [id, start] : s.assignments) assignments[id] = start;
    return {{"assignments", assignments}, {"cost", s.cost}, {"load", s.load}};
}

nlohmann::json to_json(const ScheduleTree& t) {
    auto nodes = nlohmann::json::array();
    for (const auto& node : t.nodes) {
        if (const auto* s = std::get_if<TreeSplit>(&node)) {
            nodes.push_back({{"attribute", name_of(s->attribute)},
                             {"threshold", s->threshold},
                             {"left", s->left},
                             {"right", s->right}});
        } else {
            nodes.push_back({{"leaf", std::get<TreeLeaf>(node).schedule_id}});
        }
    }
    auto order = nlohmann::json::array();
    for (auto a : t.attribute_order) order.push_back(name_of(a));
    nlohmann::json bank = nlohmann::json::object();
    for (const auto& [id, s] : t.bank) bank[std::to_string(id)] = to_json(s);
    return {{"attribute_order", order}, {"scenarios", t.scenario_names}, {"nodes", nodes}, {"schedules", bank}};
}

void write_schedule_csv(std::ostream& out, const Schedule& s, const EnergyProfile& profile) {
    const bool stamped = profile.start.has_value();
    out << (stamped ? "slot,timestamp," : "slot,") << "green,load,brown,curtailed\n";
    for (std::size_t t = 0; t < s.load.size(); ++t) {
        const auto b = slot_breakdown(s.load[t], profile.green[t], profile.export_capacity);
        out << t << ',';
        if (stamped) {
            out << format_timestamp(*profile.start + std::chrono::seconds{profile.slot_seconds * static_cast<std::int64_t>(t)})
                << ',';
        }
        out << format_double(profile.green[t]) << ',' << format_double(s.load[t]) << ',' << format_double(b.brown)
            << ',' << format_double(b.curtailed) << '\n';
    }
}

}  // namespace greenwind::sched
