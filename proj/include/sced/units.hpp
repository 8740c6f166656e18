#pragma once

#include <string_view>

#include <json.hpp>

namespace sced {

enum class Dimension { Power, Energy, Frequency, Rocof, Time, InertiaFactor, Plain };

/// Reads a scenario number, either bare or as a string with a unit suffix
/// ("80 MW", "3 MWh", "0.5Hz"). Energy converts to MW*s; everything else
/// must already be in its internal unit. Throws ParseError on a suffix that
/// does not fit the dimension.
double parse_quantity(const nlohmann::json& value, Dimension dim, std::string_view field);

double parse_quantity(std::string_view text, Dimension dim, std::string_view field);

inline constexpr double kSecondsPerHour = 3600.0;

}  // namespace sced
