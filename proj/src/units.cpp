#include "entlink/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "entlink/error.hpp"

namespace entlink {

namespace {

struct Suffix {
  std::string_view text;
  Dimension dim;
  double scale;
};

constexpr std::array<Suffix, 17> kSuffixes{{
    {"ps", Dimension::Time, 1e-12},
    {"ns", Dimension::Time, 1e-9},
    {"us", Dimension::Time, 1e-6},
    {"\xC2\xB5s", Dimension::Time, 1e-6},
    {"ms", Dimension::Time, 1e-3},
    {"s", Dimension::Time, 1.0},
    {"Hz", Dimension::Frequency, 1.0},
    {"kHz", Dimension::Frequency, 1e3},
    {"MHz", Dimension::Frequency, 1e6},
    {"GHz", Dimension::Frequency, 1e9},
    {"nm", Dimension::Length, 1e-9},
    {"um", Dimension::Length, 1e-6},
    {"mm", Dimension::Length, 1e-3},
    {"m", Dimension::Length, 1.0},
    {"rad", Dimension::Phase, 1.0},
    {"deg", Dimension::Phase, 3.14159265358979323846 / 180.0},
    {"%", Dimension::Dimensionless, 1e-2},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view dimension_name(Dimension dim) noexcept {
  switch (dim) {
    case Dimension::Dimensionless: return "dimensionless";
    case Dimension::Time: return "time";
    case Dimension::Frequency: return "frequency";
    case Dimension::Length: return "length";
    case Dimension::Phase: return "phase";
  }
  return "unknown";
}

double parse_quantity(std::string_view text, Dimension dim) {
  const std::string_view s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr == s.data()) {
    throw ParseError("cannot parse quantity '" + std::string(text) + "'");
  }
  const std::string_view suffix = trim(std::string_view(ptr, s.data() + s.size() - ptr));
  if (suffix.empty()) return value;
  for (const auto& entry : kSuffixes) {
    if (entry.text != suffix) continue;
    if (entry.dim != dim) {
      throw ParseError("quantity '" + std::string(text) + "' has " +
                       std::string(dimension_name(entry.dim)) + " units, expected " +
                       std::string(dimension_name(dim)));
    }
    return value * entry.scale;
  }
  throw ParseError("unknown unit suffix '" + std::string(suffix) + "' in '" + std::string(text) + "'");
}

}  // namespace entlink
