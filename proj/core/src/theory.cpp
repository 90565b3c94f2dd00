#include "stcf/theory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stcf/geometry.hpp"

namespace stcf {

double eta(double w_px, double alpha_px) {
  if (!(alpha_px > 0)) throw std::invalid_argument("eta: alpha must be > 0");
  if (w_px <= 0) return 0.0;
  return std::erf(w_px / (std::sqrt(2.0) * alpha_px));
}

RatePair sbr_snr_t(const TheoryParams& p) {
  RatePair r;
  double denom = p.n_total * p.tau_s * p.singles_rate_signal *
                 p.singles_rate_herald;
  if (!(denom > 0)) throw std::invalid_argument("sbr_snr_t: zero background");
  r.sbr = p.pair_coincidence_rate / denom;
  if (p.pair_coincidence_rate > 0)
    r.snr = std::sqrt(r.sbr * p.pair_coincidence_rate * p.t_acq_s /
                      (r.sbr + 2.0));
  return r;
}

RatePair sbr_snr_ts(const TheoryParams& p) {
  RatePair r;
  double h = eta(p.w_px, p.alpha_px);
  double denom = p.n_prime * p.tau_s * p.singles_rate_signal *
                 p.singles_rate_herald;
  if (!(denom > 0)) throw std::invalid_argument("sbr_snr_ts: zero background");
  r.sbr = h * p.pair_coincidence_rate / denom;
  double sbr_t = sbr_snr_t(p).sbr;
  double d2 = sbr_t + 2.0 * p.n_prime / (h * p.n_total);
  if (h > 0 && p.pair_coincidence_rate > 0 && d2 > 0)
    r.snr = std::sqrt(sbr_t * h * p.pair_coincidence_rate * p.t_acq_s / d2);
  return r;
}

Enhancements enhancements(const TheoryParams& p) {
  Enhancements e;
  double h = eta(p.w_px, p.alpha_px);
  e.e_sbr = h * p.n_total / p.n_prime;
  double sbr_t = sbr_snr_t(p).sbr;
  double d2 = sbr_t + 2.0 * p.n_prime / (h * p.n_total);
  e.e_snr = std::sqrt(h * (sbr_t + 2.0) / d2);
  e.dat_reduction = e.e_snr * e.e_snr;
  return e;
}

int optimal_width(const TheoryParams& p, int w_min, int w_max,
                  const std::function<double(int)>& n_prime_of_w,
                  std::vector<WidthPoint>* scan) {
  if (w_min < 1 || w_max < w_min)
    throw std::invalid_argument("optimal_width: need 1 <= w_min <= w_max");
  if (scan) scan->clear();
  int best_w = w_min;
  double best = -1;
  for (int w = w_min; w <= w_max; ++w) {
    TheoryParams q = p;
    q.w_px = w;
    q.n_prime = n_prime_of_w(w);
    if (!(q.n_prime > 0))
      throw std::invalid_argument("optimal_width: N' must be positive");
    Enhancements e = enhancements(q);
    if (scan)
      scan->push_back(WidthPoint{w, eta(w, p.alpha_px), e.e_sbr, e.e_snr});
    if (e.e_snr > best) {  // strict: ties keep the smaller width
      best = e.e_snr;
      best_w = w;
    }
  }
  return best_w;
}

std::function<double(int)> n_prime_exact(const SpectrometerConfig& cfg) {
  return [cfg](int w) {
    return static_cast<double>(band_cell_count(static_cast<double>(w), cfg));
  };
}

std::function<double(int)> n_prime_approx(const SpectrometerConfig& cfg) {
  double l = cfg.band_length_l;
  return [l](int w) { return l * w; };
}

ClassicalComparison classical_comparison(const TheoryParams& p) {
  ClassicalComparison c;
  double P = p.pair_rate_P, B = p.bg_rate_B;
  double mu_s = p.mu_s, mu_h = p.mu_h;
  double T = p.t_acq_s, tau = p.tau_s;
  if (!(P > 0) || !(T > 0) || !(tau > 0))
    throw std::invalid_argument("classical_comparison: P, T, tau must be > 0");

  c.degenerate = !(B > 0);
  double inf = std::numeric_limits<double>::infinity();

  c.sbr_c = c.degenerate ? inf : mu_s * P / B;
  c.snr_c = mu_s * P * T / std::sqrt((mu_s * P + 2.0 * B) * T);

  c.sbr_q = mu_s / ((mu_s * P + B) * tau);
  c.snr_q = mu_s * std::sqrt(mu_h * P * T) /
            std::sqrt(mu_s + 2.0 * (mu_s * P + B) * tau);

  c.sbr_ratio = c.degenerate ? 0.0 : c.sbr_q / c.sbr_c;
  c.snr_ratio = c.snr_q / c.snr_c;
  c.sbr_ratio_approx = 1.0 / (P * tau);
  c.snr_ratio_approx =
      c.degenerate ? 0.0
                   : std::sqrt(mu_h / (P * (mu_s / (2.0 * B) + tau)));
  return c;
}

int spectral_modes(double w_px) {
  if (!(w_px > 0)) throw std::invalid_argument("spectral_modes: w must be > 0");
  return static_cast<int>(std::floor(kGridSize / w_px));
}

}  // namespace stcf
