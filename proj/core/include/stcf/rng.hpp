#pragma once

#include <cstdint>
#include <random>

namespace stcf {

// Derives an independent stream seed from (base seed, purpose, slab index).
// Used to make simulation output identical regardless of how the time axis
// is chunked.
uint64_t derive_seed(uint64_t base, uint64_t purpose, uint64_t slab);

// mt19937_64 with hand-rolled transforms so that sequences are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  // [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  // (0, 1)
  double uniform_pos() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double rate);
  double gaussian();  // standard normal, Box-Muller

  // Geometric on {1, .., max_k} with untruncated mean `mean` (resamples the
  // tail). mean > 1.
  int geometric_trunc(double mean, int max_k);

  // exp(N(mu_log, sigma_log)) resampled into [lo_ns, hi_ns], rounded.
  int lognormal_tot_ns(double mu_log, double sigma_log, int lo_ns, int hi_ns);

  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double cached_gauss_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace stcf
