#include "greenwind/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>

#include "csv.hpp"

namespace greenwind::stats {

namespace {

double pearson_complete(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientDataError("pearson needs at least 2 complete pairs, got " + std::to_string(n));
    const auto constant = [](std::span<const double> s) {
        return std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
    };
    if (constant(x) || constant(y)) throw UndefinedCorrelationError("correlation undefined: series is constant");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("correlation undefined: series has zero variance");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

unsigned month_of(Timestamp t) {
    using namespace std::chrono;
    return static_cast<unsigned>(year_month_day{floor<days>(t)}.month());
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t variable_by_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumVariables; ++i) {
        if (kVariableNames[i] == name) return i;
    }
    throw DataError("unknown variable '" + name + "'");
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DataError("pearson: series lengths differ");
    return pearson_complete(x, y);
}

double pearson(std::span<const std::optional<double>> x, std::span<const std::optional<double>> y) {
    if (x.size() != y.size()) throw DataError("pearson: series lengths differ");
    std::vector<double> cx, cy;
    cx.reserve(x.size());
    cy.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] && y[i]) {
            cx.push_back(*x[i]);
            cy.push_back(*y[i]);
        }
    }
    return pearson_complete(cx, cy);
}

void CorrelationMatrix::validate() const {
    if (labels.size() != kNumVariables) throw DataError("correlation matrix must have 8 labels");
    for (std::size_t i = 0; i < kNumVariables; ++i) {
        if (labels[i] != kVariableNames[i]) {
            throw DataError("correlation label " + std::to_string(i) + " is '" + labels[i] + "', expected '" +
                            std::string(kVariableNames[i]) + "'");
        }
    }
    if (values.size() != labels.size()) throw DataError("correlation matrix is not square");
    for (const auto& row : values) {
        if (row.size() != labels.size()) throw DataError("correlation matrix is not square");
        for (double v : row) {
            if (!std::isfinite(v) || v < -1.0 || v > 1.0) throw DataError("correlation entry outside [-1, 1]");
        }
    }
}

CorrelationMatrix correlation_matrix(const dataio::AlignedDataset& data) {
    CorrelationMatrix m;
    m.labels.assign(kVariableNames.begin(), kVariableNames.end());
    m.values.assign(kNumVariables, std::vector<double>(kNumVariables, 0.0));
    std::vector<std::vector<std::optional<double>>> columns;
    for (std::size_t i = 0; i < kNumVariables; ++i) columns.push_back(data.column(i));
    for (std::size_t i = 0; i < kNumVariables; ++i) {
        m.values[i][i] = 1.0;
        for (std::size_t j = i + 1; j < kNumVariables; ++j) {
            double r = 0.0;
            try {
                r = pearson(columns[i], columns[j]);
            } catch (const UndefinedCorrelationError& e) {
                throw UndefinedCorrelationError(std::string(e.what()) + " (pair " + m.labels[i] + ", " + m.labels[j] +
                                                ")");
            } catch (const InsufficientDataError& e) {
                throw InsufficientDataError(std::string(e.what()) + " (pair " + m.labels[i] + ", " + m.labels[j] + ")");
            }
            m.values[i][j] = r;
            m.values[j][i] = r;
        }
    }
    return m;
}

CorrelationMatrix read_correlation_csv(std::istream& in) {
    detail::CsvReader reader(in, ',');
    std::vector<std::string> fields;
    if (!reader.next(fields)) throw DataError("correlation CSV is empty");
    CorrelationMatrix m;
    m.labels.assign(fields.begin() + 1, fields.end());
    while (reader.next(fields)) {
        if (fields.size() != m.labels.size() + 1) throw RowError(reader.line(), "wrong number of fields");
        if (m.values.size() >= m.labels.size()) throw RowError(reader.line(), "more rows than columns");
        if (fields[0] != m.labels[m.values.size()]) {
            throw RowError(reader.line(), "row label '" + fields[0] + "' does not match column order");
        }
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            const auto res = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
            if (res.ec != std::errc{} || res.ptr != fields[i].data() + fields[i].size()) {
                throw RowError(reader.line(), "unparseable correlation '" + fields[i] + "'");
            }
            row.push_back(v);
        }
        m.values.push_back(std::move(row));
    }
    m.validate();
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.values[i][i] != 1.0) throw DataError("correlation diagonal must be 1");
        for (std::size_t j = 0; j < i; ++j) {
            if (m.values[i][j] != m.values[j][i]) {
                throw DataError("correlation matrix is not symmetric at (" + m.labels[i] + ", " + m.labels[j] + ")");
            }
        }
    }
    return m;
}

CorrelationMatrix load_correlation_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_correlation_csv(in);
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
    out << "variable";
    for (const auto& l : m.labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.labels[i];
        for (double v : m.values[i]) out << ',' << format_double(v);
        out << '\n';
    }
}

nlohmann::json to_json(const CorrelationMatrix& m) {
    return {{"labels", m.labels}, {"values", m.values}};
}

void StandardizationParams::validate() const {
    for (std::size_t i = 0; i < kNumVariables; ++i) {
        const auto& p = variables[i];
        if (!std::isfinite(p.mean) || !std::isfinite(p.stddev) || !(p.stddev > 0.0)) {
            throw DataError("standardization for " + std::string(kVariableNames[i]) +
                            " needs a finite mean and positive stddev");
        }
    }
}

MeanStd describe(std::span<const std::optional<double>> column, const std::string& name) {
    std::size_t n = 0;
    double sum = 0.0;
    std::optional<double> first;
    bool constant = true;
    for (const auto& v : column) {
        if (!v) continue;
        if (!first) first = *v;
        constant = constant && *v == *first;
        sum += *v;
        ++n;
    }
    if (n == 0) throw InsufficientDataError(name + " has no values");
    if (constant) throw ZeroVarianceError(name, name + " is constant (zero variance)");
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& v : column) {
        if (v) ss += (*v - mean) * (*v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) throw ZeroVarianceError(name, name + " is constant (zero variance)");
    return {mean, sd};
}

std::vector<std::optional<double>> standardize_column(std::span<const std::optional<double>> column,
                                                      const MeanStd& params) {
    std::vector<std::optional<double>> out;
    out.reserve(column.size());
    for (const auto& v : column) {
        out.push_back(v ? std::optional<double>((*v - params.mean) / params.stddev) : std::nullopt);
    }
    return out;
}

Standardized standardize(const dataio::AlignedDataset& data) {
    Standardized s;
    s.data = data;
    for (std::size_t i = 0; i < kNumVariables; ++i) {
        const auto col = data.column(i);
        s.params.variables[i] = describe(col, std::string(kVariableNames[i]));
    }
    for (auto& row : s.data.rows) {
        for (std::size_t i = 0; i < kNumVariables; ++i) {
            if (row.values[i]) row.values[i] = s.params.to_standard(i, *row.values[i]);
        }
    }
    return s;
}

dataio::AlignedDataset destandardize(const dataio::AlignedDataset& standardized, const StandardizationParams& params) {
    dataio::AlignedDataset out = standardized;
    for (auto& row : out.rows) {
        for (std::size_t i = 0; i < kNumVariables; ++i) {
            if (row.values[i]) row.values[i] = params.from_standard(i, *row.values[i]);
        }
    }
    return out;
}

std::vector<MonthlyDistribution> monthly_distribution(const std::vector<dataio::EnergyRecord>& energy,
                                                      double bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw DataError("bin width must be positive");
    std::map<unsigned, std::vector<double>> by_month;
    double global_max = 0.0;
    for (const auto& r : energy) {
        if (!r.wind_energy) continue;
        by_month[month_of(r.timestamp)].push_back(*r.wind_energy);
        global_max = std::max(global_max, *r.wind_energy);
    }
    if (by_month.empty()) return {};

    const auto bins = static_cast<std::size_t>(std::floor(global_max / bin_width)) + 1;
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = static_cast<double>(i) * bin_width;

    std::vector<MonthlyDistribution> out;
    for (auto& [month, values] : by_month) {
        MonthlyDistribution d;
        d.month = month;
        d.bin_edges = edges;
        d.counts.assign(bins, 0);
        d.samples = values.size();
        double sum = 0.0;
        for (double v : values) {
            auto b = static_cast<std::size_t>(std::floor(v / bin_width));
            // floor can land one past the edge through rounding; edges are authoritative
            while (b + 1 < edges.size() && v >= edges[b + 1]) ++b;
            while (b > 0 && v < edges[b]) --b;
            ++d.counts[std::min(b, bins - 1)];
            sum += v;
        }
        d.summary.min = *std::min_element(values.begin(), values.end());
        d.summary.max = *std::max_element(values.begin(), values.end());
        d.summary.mean = sum / static_cast<double>(values.size());
        d.summary.median = median_of(values);
        out.push_back(std::move(d));
    }
    return out;
}

void write_distribution_csv(std::ostream& out, const std::vector<MonthlyDistribution>& dists) {
    out << "month,bin_lower,bin_upper,count\n";
    for (const auto& d : dists) {
        for (std::size_t b = 0; b < d.counts.size(); ++b) {
            out << d.month << ',' << format_double(d.bin_edges[b]) << ',' << format_double(d.bin_edges[b + 1]) << ','
                << d.counts[b] << '\n';
        }
    }
}

void write_distribution_summary_csv(std::ostream& out, const std::vector<MonthlyDistribution>& dists) {
    out << "month,samples,min,max,mean,median\n";
    for (const auto& d : dists) {
        out << d.month << ',' << d.samples << ',' << format_double(d.summary.min) << ','
            << format_double(d.summary.max) << ',' << format_double(d.summary.mean) << ','
            << format_double(d.summary.median) << '\n';
    }
}

nlohmann::json to_json(const std::vector<MonthlyDistribution>& dists) {
    auto arr = nlohmann::json::array();
    for (const auto& d : dists) {
        arr.push_back({
            {"month", d.month},
            {"samples", d.samples},
            {"bin_edges", d.bin_edges},
            {"counts", d.counts},
            {"summary",
             {{"min", d.summary.min}, {"max", d.summary.max}, {"mean", d.summary.mean}, {"median", d.summary.median}}},
        });
    }
    return arr;
}

std::vector<std::pair<std::string, std::string>> plot_extract_pairs() {
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.emplace_back("wind_direction", "wind_speed");
    for (auto a : kAttributeNames) pairs.emplace_back(std::string(a), "wind_energy");
    for (auto a : kAttributeNames) {
        if (a != "wind_speed" && a != "wind_direction") pairs.emplace_back(std::string(a), "wind_speed");
    }
    for (auto v : kVariableNames) pairs.emplace_back(std::string(kDayOfYear), std::string(v));
    return pairs;
}

PlotSeries plot_extract(const dataio::AlignedDataset& data, const std::string& x_name, const std::string& y_name) {
    PlotSeries s{x_name, y_name, {}, {}};
    const std::size_t y_index = variable_by_name(y_name);
    const bool x_is_day = x_name == kDayOfYear;
    const std::size_t x_index = x_is_day ? 0 : variable_by_name(x_name);
    using namespace std::chrono;
    sys_days origin{};
    if (!data.empty()) {
        const year_month_day first{floor<days>(data.rows.front().timestamp)};
        origin = sys_days{first.year() / January / 1};
    }
    for (const auto& row : data.rows) {
        const auto& y = row.values[y_index];
        if (!y) continue;
        double x = 0.0;
        if (x_is_day) {
            const auto d = (floor<days>(row.timestamp) - origin).count();
            x = static_cast<double>(((d % 365) + 365) % 365);
        } else if (row.values[x_index]) {
            x = *row.values[x_index];
        } else {
            continue;
        }
        s.x.push_back(x);
        s.y.push_back(*y);
    }
    return s;
}

void write_plot_csv(std::ostream& out, const PlotSeries& s) {
    out << s.x_name << ',' << s.y_name << '\n';
    for (std::size_t i = 0; i < s.x.size(); ++i) out << format_double(s.x[i]) << ',' << format_double(s.y[i]) << '\n';
}

DirectionComponents direction_components(const dataio::AlignedDataset& data) {
    DirectionComponents c;
    const auto col = data.column(variable_index(Attribute::wind_direction));
    for (const auto& v : col) {
        if (v) {
            const double rad = *v * std::numbers::pi / 180.0;
            c.sine.emplace_back(std::sin(rad));
            c.cosine.emplace_back(std::cos(rad));
        } else {
            c.sine.emplace_back();
            c.cosine.emplace_back();
        }
    }
    return c;
}

}  // namespace greenwind::stats
