#include "stcf/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stcf {
namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t derive_seed(uint64_t base, uint64_t purpose, uint64_t slab) {
  uint64_t s = base;
  uint64_t a = splitmix64(s);
  s ^= purpose * 0x9e3779b97f4a7c15ull;
  uint64_t b = splitmix64(s);
  s ^= slab * 0xc2b2ae3d27d4eb4full;
  uint64_t c = splitmix64(s);
  return a ^ (b + 0x165667b19e3779f9ull) ^ (c << 1);
}

double Rng::exponential(double rate) {
  if (!(rate > 0)) throw std::domain_error("exponential: rate > 0 required");
  return -std::log(uniform_pos()) / rate;
}

double Rng::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_gauss_;
  }
  double u1 = uniform_pos();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  cached_gauss_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

int Rng::geometric_trunc(double mean, int max_k) {
  if (!(mean > 1.0)) throw std::domain_error("geometric_trunc: mean > 1 required");
  if (max_k < 1) throw std::domain_error("geometric_trunc: max_k >= 1 required");
  double log_q = std::log1p(-1.0 / mean);  // q = 1 - p, p = 1/mean
  for (;;) {
    int k = 1 + static_cast<int>(std::log(uniform_pos()) / log_q);
    if (k >= 1 && k <= max_k) return k;
  }
}

int Rng::lognormal_tot_ns(double mu_log, double sigma_log, int lo_ns,
                          int hi_ns) {
  for (;;) {
    double v = std::exp(mu_log + sigma_log * gaussian());
    int t = static_cast<int>(std::lround(v));
    if (t >= lo_ns && t <= hi_ns) return t;
  }
}

}  // namespace stcf
