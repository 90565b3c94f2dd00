#include <doctest.h>

#include <cmath>

#include "stcf/geometry.hpp"

using namespace stcf;

namespace {
const SpectrometerConfig kCfg{};
}

TEST_CASE("column-wavelength map is linear with the configured endpoints") {
  CHECK(wavelength_at_column(0, kCfg) == doctest::Approx(775.0).epsilon(1e-12));
  CHECK(wavelength_at_column(255, kCfg) == doctest::Approx(845.0).epsilon(1e-12));
  CHECK(wavelength_at_column(127.5, kCfg) == doctest::Approx(810.0).epsilon(1e-12));
}

TEST_CASE("column to wavelength roundtrips") {
  for (double c = 0; c <= 255.0; c += 0.5) {
    double back = column_at_wavelength(wavelength_at_column(c, kCfg), kCfg);
    CHECK(std::abs(back - c) < 1e-9);
  }
}

TEST_CASE("wavelength_at_column rejects off-sensor columns") {
  CHECK_THROWS_AS(wavelength_at_column(-0.001, kCfg), std::domain_error);
  CHECK_THROWS_AS(wavelength_at_column(255.001, kCfg), std::domain_error);
}

TEST_CASE("conjugate wavelength: energy conservation fixed point and values") {
  // 810 nm is degenerate for a 405 nm pump: it is its own conjugate.
  CHECK(conjugate_wavelength(810.0, 405.0) == doctest::Approx(810.0).epsilon(1e-12));
  // spot values against independent evaluation of p*l/(l-p)
  CHECK(conjugate_wavelength(830.0, 405.0) ==
        doctest::Approx(790.9411764705883).epsilon(1e-12));
  CHECK(conjugate_wavelength(845.0, 405.0) ==
        doctest::Approx(777.7840909090909).epsilon(1e-12));
}

TEST_CASE("conjugation is an involution") {
  for (double l = 775.0; l <= 845.0; l += 0.7) {
    double twice = conjugate_wavelength(conjugate_wavelength(l, 405.0), 405.0);
    CHECK(std::abs(twice - l) < 1e-9);
  }
}

TEST_CASE("conjugate wavelength rejects wavelengths at or below the pump") {
  CHECK_THROWS_AS(conjugate_wavelength(405.0, 405.0), std::domain_error);
  CHECK_THROWS_AS(conjugate_wavelength(200.0, 405.0), std::domain_error);
}

TEST_CASE("expected signal column tracks the conjugate, including off-sensor") {
  CHECK(expected_signal_column(0, kCfg) ==
        doctest::Approx(267.0608108108109).epsilon(1e-12));
  CHECK(expected_signal_column(200, kCfg) ==
        doctest::Approx(58.395823719427845).epsilon(1e-12));
  CHECK(expected_signal_column(255, kCfg) ==
        doctest::Approx(10.142045454545341).epsilon(1e-10));
  // strictly decreasing: longer herald wavelength pairs with shorter signal
  double prev = expected_signal_column(0, kCfg);
  for (int j = 1; j < 256; ++j) {
    double e = expected_signal_column(j, kCfg);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("selection band is a symmetric distance cut around the conjugate") {
  // e(200) = 58.3958...: column 58 is 0.396 away, column 59 is 0.604 away
  CHECK(in_selection_band(58, 200, 1.0, kCfg));
  CHECK_FALSE(in_selection_band(59, 200, 1.0, kCfg));
  CHECK(in_selection_band(59, 200, 2.0, kCfg));
  // membership is monotone in w
  for (double w = 1; w <= 40; w += 1)
    if (in_selection_band(61, 200, w, kCfg))
      CHECK(in_selection_band(61, 200, w + 1, kCfg));
}

TEST_CASE("band cell count matches direct enumeration") {
  CHECK(band_cell_count(1, kCfg) == 246);
  CHECK(band_cell_count(5, kCfg) == 1229);
  CHECK(band_cell_count(14, kCfg) == 3441);
  CHECK(band_cell_count(19, kCfg) == 4670);
  CHECK(band_cell_count(30, kCfg) == 7355);
}

TEST_CASE("band cell count grows with w at roughly the band length per pixel") {
  int64_t prev = 0;
  for (int w = 1; w <= 40; ++w) {
    int64_t n = band_cell_count(w, kCfg);
    CHECK(n > prev);
    CHECK(n / static_cast<double>(w) > 220.0);
    CHECK(n / static_cast<double>(w) < 260.0);
    prev = n;
  }
  // a cut wider than the sensor keeps every cell
  CHECK(band_cell_count(1024, kCfg) == 256 * 256);
}

TEST_CASE("spectrometer validation names the offending field") {
  SpectrometerConfig c;
  c.lambda_min_nm = 900;
  CHECK_THROWS_WITH_AS(c.validate(),
                       "spectrometer.lambda_min_nm must be < lambda_max_nm",
                       ConfigError);

  c = SpectrometerConfig{};
  c.herald_rows = {64, 300};
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = SpectrometerConfig{};
  c.signal_rows = {90, 120};  // overlaps the herald stripe
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = SpectrometerConfig{};
  c.tau_ns = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  c = SpectrometerConfig{};
  c.n_total = 1024;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  CHECK_NOTHROW(SpectrometerConfig{}.validate());
}
