// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "builders.hpp"
#include "greenwind/cli.hpp"
#include "greenwind/impute.hpp"
#include "greenwind/model.hpp"
#include "greenwind/sched.hpp"
#include "greenwind/stats.hpp"
#include "oracles.hpp"

using namespace greenwind;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kFixtures = GREENWIND_FIXTURE_DIR;
const fs::path kData = GREENWIND_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::array<double, kNumAttributes> attrs_of(const dataio::AlignedRow& r) {
    std::array<double, kNumAttributes> a{};
    for (std::size_t i = 0; i < kNumAttributes; ++i) a[i] = *r.values[i + 1];
    return a;
}

Outcome correlation_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u, mu(-100.0, 100.0), sd(0.01, 50.0), rho(-0.99, 0.99);
    std::uniform_int_distribution<std::size_t> len(2, 500);
    double worst = 0.0;
    for (int pair = 0; pair < 1000; ++pair) {
        const std::size_t n = len(rng);
        const bool with_missing = pair % 2 == 1;
        const double r = rho(rng), mx = mu(rng), my = mu(rng), sx = sd(rng), sy = sd(rng);
        std::vector<std::optional<double>> x(n), y(n);
        std::size_t complete = 0;
        do {
            complete = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double a = z(rng);
                x[i] = mx + sx * a;
                y[i] = my + sy * (r * a + std::sqrt(1 - r * r) * z(rng));
                if (with_missing && u(rng) < 0.15) x[i].reset();
                if (with_missing && u(rng) < 0.15) y[i].reset();
                if (x[i] && y[i]) ++complete;
            }
        } while (complete < 2);
        worst = std::max(worst, std::abs(stats::pearson(x, y) - testing::pearson_oracle(x, y)));
    }

    bool exact = true;
    for (int trial = 0; trial < 20; ++trial) {
        auto lin = testing::linear_data(rng, 50 + 20 * trial, 1.0);
        std::vector<std::vector<std::optional<double>>> cols;
        for (auto& c : lin.columns) cols.emplace_back(c.begin(), c.end());
        for (auto& c : cols) {
            for (auto& v : c) {
                if (u(rng) < 0.1) v.reset();
            }
        }
        const auto m = stats::correlation_matrix(testing::dataset_from_columns(cols));
        for (std::size_t i = 0; i < m.size(); ++i) {
            exact = exact && m.at(i, i) == 1.0;
            for (std::size_t j = 0; j < m.size(); ++j) exact = exact && m.at(i, j) == m.at(j, i);
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && exact && secs < 5.0,
            fmt("max |pearson - oracle| = %.3g over 1000 pairs (bound 1e-12); matrices exact: %s; %.2f s (bound 5 s)",
                worst, exact ? "yes" : "no", secs)};
}

Outcome table1_solve() {
    const auto corr = stats::load_correlation_csv(kFixtures / "table1_correlation.csv");
    const auto beta = model::solve_correlation_system(corr);
    std::ifstream in(kFixtures / "table1_beta_oracle.csv");
    std::string line;
    std::getline(in, line);
    double worst = 0.0;
    std::size_t i = 0;
    while (std::getline(in, line) && i < kNumAttributes) {
        const auto comma = line.find(',');
        if (line.substr(0, comma) != kAttributeNames[i]) return {false, "oracle fixture out of attribute order"};
        worst = std::max(worst, std::abs(beta[i] - std::stod(line.substr(comma + 1))));
        ++i;
    }
    if (i != kNumAttributes) return {false, "oracle fixture incomplete"};
    return {worst <= 1e-9, fmt("max |beta - oracle| = %.3g (bound 1e-9); wind_speed beta = %.6f", worst,
                               beta[index_of(Attribute::wind_speed)])};
}

Outcome regression_recovery() {
    std::mt19937_64 rng(1003);
    double worst_coef = 0.0, worst_pred = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto lin = testing::linear_data(rng, 1000);
        const auto data = testing::dataset_from_columns(lin.columns);
        const auto m = model::fit_correlation_regression(data);
        const std::vector<std::vector<double>> xs(lin.columns.begin() + 1, lin.columns.end());
        const auto oracle = testing::standardized_ols_oracle(xs, lin.columns[0]);
        for (std::size_t i = 0; i < kNumAttributes; ++i) {
            worst_coef = std::max(worst_coef, std::abs(m.coefficients[i] - oracle[i]));
        }
        for (std::size_t col = 1; col < kNumVariables; ++col) {
            auto scaled = lin.columns;
            for (auto& v : scaled[col]) v *= 1000.0;
            const auto sdata = testing::dataset_from_columns(scaled);
            const auto ms = model::fit_correlation_regression(sdata);
            for (std::size_t r = 0; r < data.size(); ++r) {
                worst_pred = std::max(worst_pred, std::abs(m.predict_raw(attrs_of(data.rows[r])) -
                                                           ms.predict_raw(attrs_of(sdata.rows[r]))));
            }
        }
    }
    return {worst_coef <= 1e-9 && worst_pred <= 1e-9,
            fmt("max coefficient error %.3g, max prediction change after x1000 rescale %.3g MW (bounds 1e-9)",
                worst_coef, worst_pred)};
}

Outcome eq1_fidelity() {
    const std::array<double, kNumAttributes> published = {-0.84, -0.96, -0.89, 0.71, -0.15, -0.78, -1.02};
    stats::StandardizationParams p;
    for (auto& v : p.variables) v = {1.5, 2.5};
    const auto m = model::eq1_fixed_model(p);
    const auto text = model::to_json(m).dump(2);
    const auto back = model::model_from_json(nlohmann::json::parse(text));
    const bool exact = m.coefficients == published && back.coefficients == published;
    const bool stable = model::to_json(back).dump(2) == text;
    return {exact && stable, fmt("coefficients exact: %s; JSON round-trip byte-stable: %s", exact ? "yes" : "no",
                                 stable ? "yes" : "no")};
}

Outcome brute_force_optimality() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1005);
    int mismatches = 0, greedy_below_opt = 0, random_below_greedy = 0;
    double worst_gap = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto [jobs, p] = testing::random_instance(rng, 500);
        const auto oracle = testing::enumerate_schedules(jobs, p, sched::kDefaultLambda);
        const auto b = sched::brute_force(jobs, p);
        const auto g = sched::greedy(jobs, p);
        const auto rnd = testing::random_feasible(jobs, p, rng);
        if (b.cost != oracle.cost) ++mismatches;
        if (b.cost > g.cost) ++greedy_below_opt;
        if (rnd) {
            const double rc = sched::cost(*rnd, jobs, p);
            if (g.cost > rc) {
                ++random_below_greedy;
                worst_gap = std::max(worst_gap, g.cost - rc);
            }
        }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && greedy_below_opt == 0 && random_below_greedy == 0 && secs < 30.0,
            fmt("brute force != oracle on %d/200; greedy < brute force on %d; random feasible < greedy on %d "
                "(largest gap %.3g); %.2f s (bound 30 s)",
                mismatches, greedy_below_opt, random_below_greedy, worst_gap, secs)};
}

Outcome randomized_greedy_contracts() {
    std::mt19937_64 rng(1006);
    int k1_diff = 0, seed_diff = 0;
    for (int i = 0; i < 100; ++i) {
        const auto [jobs, p] = testing::random_instance(rng, 500);
        const auto g = sched::greedy(jobs, p);
        const auto seed = rng();
        if (sched::randomized_greedy(jobs, p, sched::kDefaultLambda, seed, 1).assignments != g.assignments) ++k1_diff;
        try {
            const auto a = sched::randomized_greedy(jobs, p, sched::kDefaultLambda, seed, 3);
            const auto b = sched::randomized_greedy(jobs, p, sched::kDefaultLambda, seed, 3);
            if (a.assignments != b.assignments || a.cost != b.cost) ++seed_diff;
        } catch (const InfeasibleError&) {
            // both runs must fail the same way
            try {
                sched::randomized_greedy(jobs, p, sched::kDefaultLambda, seed, 3);
                ++seed_diff;
            } catch (const InfeasibleError&) {
            }
        }
    }
    return {k1_diff == 0 && seed_diff == 0,
            fmt("k=1 differs from greedy on %d/100; same seed differs on %d/100", k1_diff, seed_diff)};
}

Outcome imputation() {
    std::mt19937_64 rng(1007);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;

    // noiseless: the last variable is an exact linear combination of the others
    std::vector<std::vector<std::optional<double>>> rows;
    for (int i = 0; i < 200; ++i) {
        const double a = 3.0 + z(rng), b = -1.0 + 2.0 * z(rng), c = 10.0 + 0.5 * z(rng);
        rows.push_back({a, b, c, 2.0 * a - 0.5 * b + 4.0 * c + 7.0});
    }
    const auto lin = impute::fit_gaussian(rows, {"a", "b", "c", "y"});
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double a = z(rng), b = z(rng), c = z(rng);
        const std::vector<std::optional<double>> rec = {a, b, c, std::nullopt};
        worst = std::max(worst, std::abs(impute::impute(lin, rec).values[3] - (2.0 * a - 0.5 * b + 4.0 * c + 7.0)));
        const std::vector<std::optional<double>> rec2 = {std::nullopt, b, c, 2.0 * a - 0.5 * b + 4.0 * c + 7.0};
        worst = std::max(worst, std::abs(impute::impute(lin, rec2).values[0] - a));
    }

    const double rho = 0.8;
    const std::size_t n = 5000;
    std::vector<std::vector<std::optional<double>>> truth, masked;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = z(rng);
        truth.push_back({5.0 + 2.0 * a, -1.0 + 0.5 * (rho * a + std::sqrt(1 - rho * rho) * z(rng))});
    }
    masked = truth;
    for (auto& r : masked) {
        for (auto& v : r) {
            if (u(rng) < 0.2) v.reset();
        }
    }
    const auto g = impute::fit_gaussian(masked, {"a", "b"});
    double se_c = 0.0, se_m = 0.0;
    std::size_t filled = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto out = impute::impute(g, masked[i]);
        for (std::size_t k = 0; k < 2; ++k) {
            if (!out.imputed[k]) continue;
            // standardize per variable so both contribute on the same scale
            const double s = std::sqrt(g.covariance(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
            se_c += std::pow((out.values[k] - *truth[i][k]) / s, 2);
            se_m += std::pow((g.mean(static_cast<Eigen::Index>(k)) - *truth[i][k]) / s, 2);
            ++filled;
        }
    }
    const double rmse_c = std::sqrt(se_c / filled), rmse_m = std::sqrt(se_m / filled);
    return {worst <= 1e-9 && rmse_c < rmse_m,
            fmt("exact-relation error %.3g (bound 1e-9); standardized RMSE conditional %.4f vs marginal %.4f "
                "over %zu filled values",
                worst, rmse_c, rmse_m, filled)};
}

Outcome decision_tree() {
    const auto corr = stats::load_correlation_csv(kFixtures / "table1_correlation.csv");
    Attribute strongest = Attribute::temperature;
    for (std::size_t i = 0; i < kNumAttributes; ++i) {
        const auto a = static_cast<Attribute>(i);
        if (std::abs(corr.energy_correlation(a)) > std::abs(corr.energy_correlation(strongest))) strongest = a;
    }
    std::mt19937_64 rng(1008);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<sched::Scenario> scenarios;
    for (int s = 0; s < 12; ++s) {
        sched::Scenario sc;
        sc.name = "s" + std::to_string(s);
        for (auto& v : sc.weather) v = std::round(u(rng) * 20.0);
        for (int t = 0; t < 6; ++t) sc.profile.green.push_back(std::round(u(rng) * 8.0) / 2.0);
        sc.profile.export_capacity = 1.0;
        sc.profile.datacenter_cap = 4.0;
        scenarios.push_back(sc);
    }
    const std::vector<sched::Job> jobs = {{"a", 1.0, 2, 0, {}}, {"b", 2.0, 1, 0, {}}, {"c", 0.5, 3, 1, {}}};
    const auto tree = sched::build_schedule_tree(scenarios, jobs, corr, 4);
    const auto* root = std::get_if<sched::TreeSplit>(&tree.nodes.at(0));
    const bool root_ok = root && root->attribute == strongest && strongest == Attribute::wind_speed;

    const auto regions = testing::leaf_regions(tree);
    int disagreements = 0;
    for (int i = 0; i < 1000; ++i) {
        AttributeValues w{};
        for (auto& v : w) v = u(rng) * 22.0 - 1.0;
        // land some records exactly on thresholds
        if (i % 10 == 0 && root) w[index_of(root->attribute)] = root->threshold;
        const auto hits = testing::containing_regions(regions, w);
        dataio::WeatherRecord rec;
        rec.values = w;
        const auto& chosen = sched::select_schedule(tree, rec);
        if (hits.size() != 1 || sched::select_leaf(tree, w) != regions[hits[0]].schedule_id ||
            &chosen != &tree.bank.at(regions[hits[0]].schedule_id)) {
            ++disagreements;
        }
    }
    return {root_ok && disagreements == 0,
            fmt("root splits on %s (strongest |r| attribute %s); %zu leaves; disagreements with region oracle %d/1000",
                root ? std::string(name_of(root->attribute)).c_str() : "(leaf)",
                std::string(name_of(strongest)).c_str(), tree.leaf_count(), disagreements)};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("greenwind-acceptance-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run_cli(const std::vector<std::string>& args, std::string& err) {
    std::vector<const char*> argv = {"greenwind"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, e;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, e);
    err = e.str();
    return code;
}

Outcome pipeline_smoke() {
    TempDir tmp("pipeline");
    const auto config = (kData / "config.json").string();
    const auto t0 = Clock::now();
    std::string err;
    for (const char* run : {"a", "b"}) {
        const auto out = (tmp.path / run).string();
        for (const char* cmd : {"analyze", "fit", "predict", "schedule"}) {
            const int code = run_cli({"--config", config, "--out", out, cmd}, err);
            if (code != 0) return {false, fmt("%s exited %d: %s", cmd, code, err.c_str())};
        }
    }
    const double secs = seconds_since(t0) / 2.0;
    std::size_t files = 0, differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(tmp.path / "a")) {
        if (!entry.is_regular_file()) continue;
        ++files;
        if (slurp(entry.path()) != slurp(tmp.path / "b" / fs::relative(entry.path(), tmp.path / "a"))) ++differing;
    }
    bool artifacts = true;
    for (const char* f : {"correlation.csv", "monthly_distribution.csv", "model.json", "metrics.json",
                          "predictions.csv", "schedule.json", "schedule.csv"}) {
        artifacts = artifacts && fs::exists(tmp.path / "a" / f);
    }
    return {differing == 0 && artifacts && secs < 10.0,
            fmt("exit 0 for all four commands; %zu artifacts, %zu differ between runs; declared artifacts present: "
                "%s; %.2f s per pipeline (bound 10 s)",
                files, differing, artifacts ? "yes" : "no", secs)};
}

Outcome winter_peak() {
    TempDir tmp("analyze");
    std::string err;
    const int code = run_cli({"--config", (kData / "config.json").string(), "--out", tmp.path.string(), "analyze"}, err);
    if (code != 0) return {false, fmt("analyze exited %d: %s", code, err.c_str())};
    std::ifstream in(tmp.path / "monthly_summary.csv");
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, unsigned>> means;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        means.emplace_back(std::stod(f.at(4)), static_cast<unsigned>(std::stoul(f.at(0))));
    }
    if (means.size() < 2) return {false, "fewer than two months in the summary"};
    std::sort(means.rbegin(), means.rend());
    const bool ok = (means[0].second == 12 && means[1].second == 1) || (means[0].second == 1 && means[1].second == 12);
    return {ok, fmt("top months by mean: %u (%.2f MW), %u (%.2f MW); third %u (%.2f MW)", means[0].second,
                    means[0].first, means[1].second, means[1].first, means[2].second, means[2].first)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"correlation oracle equivalence", correlation_oracle},
        {"published correlation matrix solve", table1_solve},
        {"regression recovery and unit invariance", regression_recovery},
        {"reference model coefficient fidelity", eq1_fidelity},
        {"brute-force optimality and ordering", brute_force_optimality},
        {"randomized-greedy contracts", randomized_greedy_contracts},
        {"imputation recovery", imputation},
        {"decision-tree root and descent", decision_tree},
        {"pipeline smoke test", pipeline_smoke},
        {"winter-peaked monthly means", winter_peak},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << " -- " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
