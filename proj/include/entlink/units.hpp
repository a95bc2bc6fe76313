#pragma once

#include <string_view>

namespace entlink {

enum class Dimension { Dimensionless, Time, Frequency, Length, Phase };

/// Parses "6.9us", "16.1 kHz", "606nm" or a bare number into SI units.
/// A bare number is taken to already be in SI. Throws ParseError on an unknown
/// suffix or a suffix of the wrong dimension.
double parse_quantity(std::string_view text, Dimension dim);

std::string_view dimension_name(Dimension dim) noexcept;

}  // namespace entlink
