#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace greenwind {

using Timestamp = std::chrono::sys_seconds;

/// Weather attributes in the fixed order used throughout the library.
enum class Attribute : std::size_t {
    temperature = 0,
    cloud_cover,
    air_pressure,
    wind_speed,
    wind_direction,
    precipitation,
    sunshine,
};

inline constexpr std::size_t kNumAttributes = 7;

/// Wind energy plus the seven attributes; index 0 is wind energy.
inline constexpr std::size_t kNumVariables = kNumAttributes + 1;

inline constexpr std::array<std::string_view, kNumAttributes> kAttributeNames = {
    "temperature", "cloud_cover", "air_pressure", "wind_speed",
    "wind_direction", "precipitation", "sunshine",
};

inline constexpr std::array<std::string_view, kNumVariables> kVariableNames = {
    "wind_energy", "temperature", "cloud_cover", "air_pressure",
    "wind_speed", "wind_direction", "precipitation", "sunshine",
};

constexpr std::size_t index_of(Attribute a) { return static_cast<std::size_t>(a); }

/// Variable index (0 = wind energy) of an attribute.
constexpr std::size_t variable_index(Attribute a) { return index_of(a) + 1; }

constexpr std::string_view name_of(Attribute a) { return kAttributeNames[index_of(a)]; }

std::optional<Attribute> attribute_from_name(std::string_view name);

/// Per-attribute values; std::nullopt marks a missing cell.
using AttributeValues = std::array<std::optional<double>, kNumAttributes>;

/// Energy followed by attributes, in kVariableNames order.
using VariableValues = std::array<std::optional<double>, kNumVariables>;

// Error hierarchy. The CLI maps each family onto an exit code.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input, violated data invariants, degenerate statistics.
class DataError : public Error {
public:
    using Error::Error;
};

/// A row-level parse or validation failure, carrying the 1-based file line.
class RowError : public DataError {
public:
    RowError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// No feasible placement exists for a scheduling instance.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// A search would exceed its configured enumeration bound.
class LimitExceededError : public Error {
public:
    using Error::Error;
};

std::string format_timestamp(Timestamp t);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace greenwind
