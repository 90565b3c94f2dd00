#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stcf/types.hpp"

namespace stcf {

// One signal event paired with its nearest herald.
struct Match {
  int64_t dt_ps = 0;       // signal toa - herald toa, signed
  int64_t sig_toa_ps = 0;
  uint16_t sig_col = 0;
  uint16_t her_col = 0;
};

// For each signal event, the herald minimizing |dt| (ties: earlier herald).
// Throws std::invalid_argument when herald is empty.
std::vector<Match> match_coincidences(std::span<const PhotonEvent> signal,
                                      std::span<const PhotonEvent> herald);

// Gated coincidence counts per (signal col, herald col), with singles
// marginals of both arms.
struct JointSpectrum {
  std::vector<uint64_t> counts;     // 256*256, row-major [sig][her]
  std::vector<double> sig_rate;     // singles rate per signal column, /s
  std::vector<double> her_rate;     // singles rate per herald column, /s
  double duration_s = 0;

  JointSpectrum();
  uint64_t& at(int sig_col, int her_col);
  uint64_t at(int sig_col, int her_col) const;
};

JointSpectrum build_joint_spectrum(std::span<const Match> gated,
                                   std::span<const PhotonEvent> signal,
                                   std::span<const PhotonEvent> herald,
                                   double duration_s);

// Accidental coincidence rate tau * sum over allowed (i,j) of S_i * S_j.
// With no mask the sum factorizes over all column pairs.
using CellMask = std::function<bool(int sig_col, int her_col)>;
double estimate_background(const JointSpectrum& js, double tau_s,
                           const CellMask* mask = nullptr);

struct Histogram {
  std::vector<uint64_t> counts;
  double lo_ns = 0, hi_ns = 0, bin_ns = 0;
  uint64_t underflow = 0, overflow = 0;
  double peak_ns = 0;  // center of the max bin after 3-bin smoothing

  int bin_index(double dt_ns) const;
  double bin_center(int i) const;
};

Histogram histogram_dt(std::span<const Match> matches,
                       const SpectrometerConfig& cfg, double lo_ns = 0.0,
                       double hi_ns = 100.0);

struct AnalysisMode {
  bool spectral = false;
  double w_px = 0;  // selection-band width, used when spectral

  static AnalysisMode temporal() { return {false, 0}; }
  static AnalysisMode temporal_spectral(double w) { return {true, w}; }
};

struct CoincidenceResult {
  Histogram histogram;
  double peak_ns = 0;
  double c_tot = 0;       // counts inside the gate
  double c_b = 0;         // estimated accidentals inside the gate
  double sbr = 0, sbr_sigma = 0;
  double snr = 0, snr_sigma = 0;
  AnalysisMode mode;
  double duration_s = 0;
  JointSpectrum joint;
};

// Full chain: match -> optional band filter -> histogram/peak -> tau gate
// around the peak -> background estimate -> SBR/SNR with Poisson errors.
CoincidenceResult analyze(std::span<const PhotonEvent> signal,
                          std::span<const PhotonEvent> herald,
                          const SpectrometerConfig& cfg, AnalysisMode mode,
                          double duration_s);

class FitError : public std::runtime_error {
 public:
  explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BandFit {
  double alpha_px = 0;
  double alpha_sigma = 0;
  double amplitude = 0;
  double offset = 0;
  int iterations = 0;
};

// Aligns each herald column by its conjugate, sums a 1-D cross-band profile,
// and fits A*exp(-2 x^2 / alpha^2) + c by Gauss-Newton (golden-section
// fallback). Throws FitError on degenerate profiles.
BandFit fit_band_profile(const JointSpectrum& js, const SpectrometerConfig& cfg);

// Fit on a raw profile sampled at integer offsets x = i - (len-1)/2.
BandFit fit_gaussian_profile(std::span<const double> profile);

}  // namespace stcf
