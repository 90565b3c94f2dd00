#pragma once

#include <functional>
#include <vector>

#include "stcf/types.hpp"

namespace stcf {

// Closed-form rate model inputs. Field names in the JSON form follow the
// conventional symbols (C, S_s, S_h, tau_s, N, N_prime, w_px, alpha_px, T_s,
// P, B, mu_s, mu_h).
struct TheoryParams {
  double pair_coincidence_rate = 10.6;  // C, true gated coincidences /s
  double singles_rate_signal = 221.0;   // S_s, per column /s
  double singles_rate_herald = 148.0;   // S_h, per column /s
  double tau_s = 20e-9;
  double n_total = 65536;
  double n_prime = 4636;
  double w_px = 19;
  double alpha_px = 10.0;
  double t_acq_s = 200;
  // classical-comparison inputs
  double pair_rate_P = 4e6;
  double bg_rate_B = 6e4;
  double mu_s = 3e-4;
  double mu_h = 0.01;
};

// Fraction of true coincidences surviving a selection band of width w:
// erf(w / (sqrt(2) alpha)).
double eta(double w_px, double alpha_px);

struct RatePair {
  double sbr = 0;
  double snr = 0;
};

// Temporal-only filtering.
RatePair sbr_snr_t(const TheoryParams& p);
// Spectro-temporal filtering with the selection band.
RatePair sbr_snr_ts(const TheoryParams& p);

struct Enhancements {
  double e_sbr = 0;
  double e_snr = 0;
  double dat_reduction = 0;  // acquisition-time factor at fixed SNR, e_snr^2
};

Enhancements enhancements(const TheoryParams& p);

struct WidthPoint {
  int w = 0;
  double eta = 0;
  double e_sbr = 0;
  double e_snr = 0;
};

// N'(w) is supplied by the caller: exact band counting or the l*w
// approximation. Returns the w maximizing E_SNR (ties toward smaller w);
// optionally writes the full scan.
int optimal_width(const TheoryParams& p, int w_min, int w_max,
                  const std::function<double(int)>& n_prime_of_w,
                  std::vector<WidthPoint>* scan = nullptr);

std::function<double(int)> n_prime_exact(const SpectrometerConfig& cfg);
std::function<double(int)> n_prime_approx(const SpectrometerConfig& cfg);

struct ClassicalComparison {
  double sbr_c = 0, snr_c = 0;   // direct (unheralded) detection
  double sbr_q = 0, snr_q = 0;   // heralded, temporally gated
  double sbr_ratio = 0, snr_ratio = 0;
  double sbr_ratio_approx = 0;   // 1 / (P tau), background-dominated limit
  double snr_ratio_approx = 0;
  bool degenerate = false;       // B == 0: sbr_c is infinite
};

ClassicalComparison classical_comparison(const TheoryParams& p);

// Distinct spectral bins resolvable at band width w over 256 columns.
int spectral_modes(double w_px);

}  // namespace stcf
