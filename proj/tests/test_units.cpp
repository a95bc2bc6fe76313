#include <doctest.h>

#include "entlink/error.hpp"
#include "entlink/units.hpp"

using namespace entlink;

TEST_CASE("quantities parse with unit suffixes") {
  CHECK(parse_quantity("6.9us", Dimension::Time) == doctest::Approx(6.9e-6).epsilon(1e-15));
  CHECK(parse_quantity("280 ns", Dimension::Time) == doctest::Approx(280e-9).epsilon(1e-15));
  CHECK(parse_quantity("16.1kHz", Dimension::Frequency) == doctest::Approx(16.1e3).epsilon(1e-15));
  CHECK(parse_quantity("261.1MHz", Dimension::Frequency) == doctest::Approx(261.1e6).epsilon(1e-15));
  CHECK(parse_quantity("606nm", Dimension::Length) == doctest::Approx(606e-9).epsilon(1e-15));
  CHECK(parse_quantity("90deg", Dimension::Phase) == doctest::Approx(1.5707963267948966).epsilon(1e-15));
  CHECK(parse_quantity("19.7%", Dimension::Dimensionless) == doctest::Approx(0.197).epsilon(1e-15));
  CHECK(parse_quantity("0.25", Dimension::Dimensionless) == 0.25);
}

TEST_CASE("wrong or unknown units are rejected") {
  CHECK_THROWS_AS(parse_quantity("5kHz", Dimension::Time), ParseError);
  CHECK_THROWS_AS(parse_quantity("5 furlongs", Dimension::Length), ParseError);
  CHECK_THROWS_AS(parse_quantity("", Dimension::Time), ParseError);
  CHECK_THROWS_AS(parse_quantity("ns", Dimension::Time), ParseError);
}
