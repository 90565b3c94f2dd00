#pragma once

#include <cstdint>

#include "stcf/types.hpp"

namespace stcf {

// Linear column -> wavelength map. col may be fractional; throws
// std::domain_error outside [0, 255].
double wavelength_at_column(double col, const SpectrometerConfig& cfg);

// Inverse of wavelength_at_column. Returns a fractional column which may lie
// outside [0, 255] when the wavelength is outside the imaged range.
double column_at_wavelength(double lambda_nm, const SpectrometerConfig& cfg);

// Energy-conservation conjugate: the partner wavelength of lambda_nm for a
// pump at lambda_pump_nm. Throws std::domain_error if lambda_nm <= pump.
double conjugate_wavelength(double lambda_nm, double lambda_pump_nm);

// Signal column conjugate to a herald column. May fall outside [0, 255],
// meaning the partner photon misses the imaged band.
double expected_signal_column(double herald_col, const SpectrometerConfig& cfg);

// True iff signal_col lies within w_px/2 of the conjugate of herald_col.
bool in_selection_band(int signal_col, int herald_col, double w_px,
                       const SpectrometerConfig& cfg);

// Number of (signal_col, herald_col) pairs inside the selection band.
int64_t band_cell_count(double w_px, const SpectrometerConfig& cfg);

}  // namespace stcf
