#include "stcf/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stcf {

void SpectrometerConfig::validate() const {
  if (!(lambda_min_nm < lambda_max_nm))
    throw ConfigError("spectrometer.lambda_min_nm must be < lambda_max_nm");
  if (!(lambda_min_nm > lambda_pump_nm))
    throw ConfigError("spectrometer.lambda_min_nm must exceed lambda_pump_nm");
  if (!(lambda_pump_nm > 0))
    throw ConfigError("spectrometer.lambda_pump_nm must be positive");
  auto check_band = [](const RowBand& b, const char* name) {
    if (b.lo < 0 || b.hi > kGridSize - 1 || b.lo > b.hi)
      throw ConfigError(std::string("spectrometer.") + name +
                        " must be an inclusive range inside [0, 255]");
  };
  check_band(herald_rows, "herald_rows");
  check_band(signal_rows, "signal_rows");
  if (herald_rows.lo <= signal_rows.hi && signal_rows.lo <= herald_rows.hi)
    throw ConfigError(
        "spectrometer.herald_rows and signal_rows must be disjoint");
  if (!(tau_ns > 0)) throw ConfigError("spectrometer.tau_ns must be positive");
  if (n_total != kGridSize * kGridSize)
    throw ConfigError("spectrometer.n_total must be 65536");
  if (band_length_l <= 0)
    throw ConfigError("spectrometer.band_length_l must be positive");
  if (!(histogram_bin_ns > 0))
    throw ConfigError("spectrometer.histogram_bin_ns must be positive");
}

double wavelength_at_column(double col, const SpectrometerConfig& cfg) {
  if (!(col >= 0.0 && col <= 255.0))
    throw std::domain_error("column " + std::to_string(col) +
                            " outside [0, 255]");
  return cfg.lambda_min_nm +
         (col / 255.0) * (cfg.lambda_max_nm - cfg.lambda_min_nm);
}

double column_at_wavelength(double lambda_nm, const SpectrometerConfig& cfg) {
  return 255.0 * (lambda_nm - cfg.lambda_min_nm) /
         (cfg.lambda_max_nm - cfg.lambda_min_nm);
}

double conjugate_wavelength(double lambda_nm, double lambda_pump_nm) {
  if (!(lambda_nm > lambda_pump_nm))
    throw std::domain_error("wavelength must exceed the pump wavelength");
  return lambda_pump_nm * lambda_nm / (lambda_nm - lambda_pump_nm);
}

double expected_signal_column(double herald_col, const SpectrometerConfig& cfg) {
  double lambda_h = wavelength_at_column(herald_col, cfg);
  double lambda_s = conjugate_wavelength(lambda_h, cfg.lambda_pump_nm);
  return column_at_wavelength(lambda_s, cfg);
}

bool in_selection_band(int signal_col, int herald_col, double w_px,
                       const SpectrometerConfig& cfg) {
  double expected = expected_signal_column(herald_col, cfg);
  return std::abs(signal_col - expected) <= w_px * 0.5;
}

int64_t band_cell_count(double w_px, const SpectrometerConfig& cfg) {
  int64_t n = 0;
  for (int j = 0; j < kGridSize; ++j) {
    double expected = expected_signal_column(j, cfg);
    for (int i = 0; i < kGridSize; ++i)
      if (std::abs(i - expected) <= w_px * 0.5) ++n;
  }
  return n;
}

}  // namespace stcf
