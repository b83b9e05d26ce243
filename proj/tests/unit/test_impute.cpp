#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "builders.hpp"
#include "greenwind/impute.hpp"

using namespace greenwind;
using namespace greenwind::impute;

namespace {

using Row = std::vector<std::optional<double>>;

std::vector<Row> linear_rows(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    std::vector<Row> rows;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = z(rng);
        rows.push_back({x, 2.0 * x});
    }
    return rows;
}

}  // namespace

TEST_SUITE("impute") {

TEST_CASE("constant column: mean is the constant, variance row and column zero") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    std::vector<Row> rows;
    for (int i = 0; i < 20; ++i) rows.push_back({z(rng), 4.5, z(rng)});
    const auto m = fit_gaussian(rows, {"a", "c", "b"});
    CHECK(m.mean(1) == 4.5);
    for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(m.covariance(1, j) == 0.0);
        CHECK(m.covariance(j, 1) == 0.0);
    }
    CHECK(m.singular);
    m.validate();
}

TEST_CASE("perfectly dependent columns give a flagged singular covariance") {
    std::mt19937_64 rng(2);
    const auto m = fit_gaussian(linear_rows(30, rng), {"x", "y"});
    CHECK(m.singular);
    std::mt19937_64 rng2(2);
    std::normal_distribution<double> z;
    std::vector<Row> indep;
    for (int i = 0; i < 30; ++i) indep.push_back({z(rng2), z(rng2)});
    CHECK_FALSE(fit_gaussian(indep, {"x", "y"}).singular);
}

TEST_CASE("fit needs more complete rows than dimensions and skips incomplete rows") {
    CHECK_THROWS_AS(fit_gaussian(std::vector<Row>{{1.0, 2.0}, {2.0, 3.0}}, {"x", "y"}), DataError);
    std::vector<Row> rows = {{1.0, 2.0}, {2.0, 5.0}, {3.0, 4.0}, {100.0, std::nullopt}};
    const auto m = fit_gaussian(rows, {"x", "y"});
    CHECK(m.rows == 3);
    CHECK(m.mean(0) == 2.0);
    CHECK(m.covariance(0, 0) == 1.0);  // sample covariance, n - 1
}

TEST_CASE("Monte-Carlo: fitted mean lies within 5 standard errors of the generator") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z;
    const std::size_t n = 4000;
    const std::array<double, 3> mu = {10.0, -3.0, 0.5}, sd = {2.0, 0.5, 7.0};
    std::vector<Row> rows;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = z(rng);
        rows.push_back({mu[0] + sd[0] * f, mu[1] + sd[1] * (0.6 * f + 0.8 * z(rng)), mu[2] + sd[2] * z(rng)});
    }
    const auto m = fit_gaussian(rows, {"a", "b", "c"});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(m.mean(static_cast<Eigen::Index>(i)) - mu[i]) <= 5.0 * sd[i] / std::sqrt(double(n)));
    }
}

TEST_CASE("fully observed record is returned unchanged") {
    std::mt19937_64 rng(4);
    const auto m = fit_gaussian(linear_rows(10, rng), {"x", "y"});
    const Row rec = {0.25, -7.0};
    const auto out = impute::impute(m, rec);
    CHECK(out.values == std::vector<double>{0.25, -7.0});
    CHECK(out.imputed_count() == 0);
}

TEST_CASE("record with everything missing gets the marginal means") {
    std::mt19937_64 rng(5);
    const auto m = fit_gaussian(linear_rows(10, rng), {"x", "y"});
    const Row rec = {std::nullopt, std::nullopt};
    const auto out = impute::impute(m, rec);
    CHECK(out.values[0] == m.mean(0));
    CHECK(out.values[1] == m.mean(1));
    CHECK(out.imputed_count() == 2);
}

TEST_CASE("exact relation y = 2x: observing x = 3 fills y = 6") {
    std::mt19937_64 rng(6);
    const auto m = fit_gaussian(linear_rows(50, rng), {"x", "y"});
    const Row rec = {3.0, std::nullopt};
    const auto out = impute::impute(m, rec);
    CHECK(std::abs(out.values[1] - 6.0) <= 1e-9);
    CHECK(out.imputed[1]);
    CHECK_FALSE(out.degraded);
}

TEST_CASE("singular observed block uses the pseudo-inverse and flags degradation") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> z;
    std::vector<Row> rows;
    for (int i = 0; i < 40; ++i) {
        const double x = z(rng);
        rows.push_back({x, 2.0 * x, -x + 1.0});
    }
    const auto m = fit_gaussian(rows, {"x", "y", "w"});
    const Row rec = {1.5, 3.0, std::nullopt};
    const auto out = impute::impute(m, rec);
    CHECK(out.degraded);
    CHECK(std::abs(out.values[2] - (-0.5)) <= 1e-9);
}

TEST_CASE("property: imputation is idempotent") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    std::vector<Row> rows;
    for (int i = 0; i < 200; ++i) {
        const double f = z(rng);
        rows.push_back({f + 0.3 * z(rng), z(rng), -f + 0.5 * z(rng), 2.0 * f + z(rng)});
    }
    const auto m = fit_gaussian(rows, {"a", "b", "c", "d"});
    for (int t = 0; t < 50; ++t) {
        Row rec = {z(rng), z(rng), z(rng), z(rng)};
        for (auto& v : rec) {
            if (u(rng) < 0.4) v.reset();
        }
        const auto once = impute::impute(m, rec);
        const Row filled(once.values.begin(), once.values.end());
        const auto twice = impute::impute(m, filled);
        CHECK(twice.values == once.values);
        CHECK(twice.imputed_count() == 0);
    }
}

TEST_CASE("conditional mean beats the marginal mean on correlated data") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    const double rho = 0.8;
    std::vector<Row> truth;
    for (int i = 0; i < 3000; ++i) {
        const double a = z(rng);
        truth.push_back({a, rho * a + std::sqrt(1 - rho * rho) * z(rng)});
    }
    auto masked = truth;
    for (auto& r : masked) {
        if (u(rng) < 0.2) r[static_cast<std::size_t>(u(rng) < 0.5)].reset();
    }
    const auto m = fit_gaussian(masked, {"a", "b"});
    double se_cond = 0.0, se_marg = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto out = impute::impute(m, masked[i]);
        for (std::size_t k = 0; k < 2; ++k) {
            if (!out.imputed[k]) continue;
            se_cond += std::pow(out.values[k] - *truth[i][k], 2);
            se_marg += std::pow(m.mean(static_cast<Eigen::Index>(k)) - *truth[i][k], 2);
        }
    }
    CHECK(se_cond < se_marg);
}

TEST_CASE("dataset imputation clips to field domains and writes flag columns") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> z;
    std::vector<std::vector<std::optional<double>>> cols(kNumVariables);
    for (int r = 0; r < 60; ++r) {
        const double f = z(rng);
        cols[0].push_back(5.0 + 3.0 * f);
        cols[1].push_back(10.0 + z(rng));
        cols[2].push_back(0.98 + 0.01 * f);
        cols[3].push_back(1010.0 + z(rng));
        cols[4].push_back(6.0 + 2.0 * f);
        cols[5].push_back(180.0 + 30.0 * z(rng));
        cols[6].push_back(std::abs(z(rng)));
        cols[7].push_back(std::abs(z(rng)));
    }
    cols[0].push_back(std::nullopt);
    cols[2].push_back(std::nullopt);
    cols[1].push_back(10.0);
    cols[3].push_back(1010.0);
    cols[4].push_back(60.0);  // far above the mean: cloud cover extrapolates past 1
    cols[5].push_back(180.0);
    cols[6].push_back(0.0);
    cols[7].push_back(0.0);
    const auto data = greenwind::testing::dataset_from_columns(cols);
    const auto res = impute_dataset(fit_gaussian(data), data);
    const auto& last = res.data.rows.back();
    CHECK(*last.get(Attribute::cloud_cover) == 1.0);
    CHECK(*last.wind_energy() > 5.0);
    CHECK(res.imputed.back()[0]);
    CHECK(res.imputed.back()[2]);
    CHECK_FALSE(res.imputed.back()[1]);
    std::ostringstream out;
    write_imputed_csv(out, res);
    CHECK(out.str().find("wind_energy_imputed") != std::string::npos);
}

TEST_CASE("gaussian model JSON round-trip") {
    std::mt19937_64 rng(11);
    const auto m = fit_gaussian(linear_rows(20, rng), {"x", "y"});
    const auto back = gaussian_from_json(to_json(m));
    CHECK(back.variables == m.variables);
    CHECK(back.mean == m.mean);
    CHECK(back.covariance == m.covariance);
    CHECK(back.singular == m.singular);
}

}  // TEST_SUITE
