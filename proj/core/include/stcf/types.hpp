#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stcf {

inline constexpr int kGridSize = 256;

// One raw camera hit. toa_ps counts from run start; tot_ns is the
// time-over-threshold energy proxy.
struct PixelHit {
  uint16_t col = 0;
  uint16_t row = 0;
  int64_t toa_ps = 0;
  uint16_t tot_ns = 0;
};

inline bool operator==(const PixelHit& a, const PixelHit& b) {
  return a.col == b.col && a.row == b.row && a.toa_ps == b.toa_ps &&
         a.tot_ns == b.tot_ns;
}

// Stream order: time, then (col,row) to make ties deterministic.
inline bool hit_less(const PixelHit& a, const PixelHit& b) {
  if (a.toa_ps != b.toa_ps) return a.toa_ps < b.toa_ps;
  if (a.col != b.col) return a.col < b.col;
  return a.row < b.row;
}

enum class Arm : uint8_t { Unassigned = 0, Herald = 1, Signal = 2 };

// Centroided, time-corrected single-photon detection.
struct PhotonEvent {
  uint16_t col = 0;
  uint16_t row = 0;
  int64_t toa_ps = 0;
  Arm arm = Arm::Unassigned;
  uint16_t cluster_size = 1;
};

inline bool event_less(const PhotonEvent& a, const PhotonEvent& b) {
  if (a.toa_ps != b.toa_ps) return a.toa_ps < b.toa_ps;
  if (a.col != b.col) return a.col < b.col;
  return a.row < b.row;
}

// Inclusive row range of one spectrum stripe on the sensor.
struct RowBand {
  int lo = 0;
  int hi = 0;
  bool contains(int row) const { return row >= lo && row <= hi; }
  int span() const { return hi - lo + 1; }
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Camera/spectrometer geometry and the analysis constants derived from it.
// Columns map linearly to wavelength; two disjoint row stripes carry the
// herald and signal spectra.
struct SpectrometerConfig {
  double lambda_min_nm = 775.0;  // wavelength at column 0
  double lambda_max_nm = 845.0;  // wavelength at column 255
  double lambda_pump_nm = 405.0;
  RowBand herald_rows{64, 95};
  RowBand signal_rows{160, 191};
  double tau_ns = 20.0;          // coincidence gate width
  int n_total = 65536;           // all column pairs, 256*256
  int band_length_l = 244;       // selection-band length (columns)
  double histogram_bin_ns = 1.5625;
  double peak_offset_ns = 25.0;  // expected time-of-flight delay

  void validate() const;
};

}  // namespace stcf
