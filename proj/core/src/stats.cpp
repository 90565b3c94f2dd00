#include "stcf/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stcf {
namespace {

constexpr int kMaxIter = 10000;
constexpr double kEps = 1e-16;
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;

// Series representation, converges quickly for x < a + 1.
double gammp_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("gammp series failed to converge");
}

// Modified Lentz continued fraction for Q(a, x), best for x >= a + 1.
double gammq_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kFpMin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = b + an / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw std::runtime_error("gammq continued fraction failed to converge");
}

}  // namespace

double gammp(double a, double x) {
  if (!(a > 0) || x < 0) throw std::domain_error("gammp: a > 0, x >= 0 required");
  if (x == 0) return 0.0;
  if (x < a + 1.0) return gammp_series(a, x);
  return 1.0 - gammq_cf(a, x);
}

double gammq(double a, double x) {
  if (!(a > 0) || x < 0) throw std::domain_error("gammq: a > 0, x >= 0 required");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gammp_series(a, x);
  return gammq_cf(a, x);
}

double poisson_tail(int64_t k, double lambda) {
  if (lambda < 0) throw std::domain_error("poisson_tail: lambda >= 0 required");
  if (k <= 0) return 1.0;
  if (lambda == 0) return 0.0;
  return gammp(static_cast<double>(k), lambda);
}

double chi2_sf(double x, int dof) {
  if (dof <= 0) throw std::domain_error("chi2_sf: dof > 0 required");
  if (x <= 0) return 1.0;
  return gammq(0.5 * dof, 0.5 * x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double binom_cdf(int n, double p, int x) {
  if (n < 0 || p < 0 || p > 1) throw std::domain_error("binom_cdf: bad params");
  if (x < 0) return 0.0;
  if (x >= n) return 1.0;
  if (p == 0) return 1.0;
  if (p == 1) return 0.0;
  double lp = std::log(p), lq = std::log1p(-p);
  double cdf = 0.0;
  for (int i = 0; i <= x; ++i) {
    double lpmf = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) -
                  std::lgamma(n - i + 1.0) + i * lp + (n - i) * lq;
    cdf += std::exp(lpmf);
  }
  return cdf < 1.0 ? cdf : 1.0;
}

double binom_min_tail(int n, double p, int x) {
  double lo = binom_cdf(n, p, x);                  // P[X <= x]
  double hi = 1.0 - binom_cdf(n, p, x - 1);        // P[X >= x]
  return lo < hi ? lo : hi;
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace stcf
