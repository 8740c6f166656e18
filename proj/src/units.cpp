#include "sced/units.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "sced/error.hpp"

namespace sced {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Multiplier taking a value with `suffix` to the internal unit of `dim`.
bool unit_factor(Dimension dim, std::string_view suffix, double& factor) {
  factor = 1.0;
  if (suffix.empty()) return true;
  switch (dim) {
    case Dimension::Power:
      return suffix == "MW";
    case Dimension::Energy:
      if (suffix == "MWs" || suffix == "MW*s" || suffix == "MW.s") return true;
      if (suffix == "MWh") {
        factor = kSecondsPerHour;
        return true;
      }
      return false;
    case Dimension::Frequency:
      return suffix == "Hz";
    case Dimension::Rocof:
      return suffix == "Hz/s";
    case Dimension::Time:
      return suffix == "s";
    case Dimension::InertiaFactor:
      return suffix == "MW/(Hz/s)" || suffix == "MWs/Hz";
    case Dimension::Plain:
      return false;
  }
  return false;
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dim, std::string_view field) {
  const std::string_view s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr == s.data()) {
    throw ParseError(std::string(field) + ": not a number: '" + std::string(text) + "'");
  }
  const std::string_view suffix = trim(std::string_view(ptr, s.data() + s.size() - ptr));
  double factor = 1.0;
  if (!unit_factor(dim, suffix, factor)) {
    throw ParseError(std::string(field) + ": unit '" + std::string(suffix) +
                     "' does not apply to this field");
  }
  return value * factor;
}

double parse_quantity(const nlohmann::json& value, Dimension dim, std::string_view field) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_quantity(std::string_view(value.get_ref<const std::string&>()), dim, field);
  throw ParseError(std::string(field) + ": expected a number or a quantity string");
}

}  // namespace sced
