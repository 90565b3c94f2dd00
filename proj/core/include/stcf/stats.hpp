#pragma once

#include <cstdint>
#include <string_view>

namespace stcf {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gammp(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gammq(double a, double x);

// P[Poisson(lambda) >= k]; equals P(k, lambda) for k >= 1, else 1.
double poisson_tail(int64_t k, double lambda);

// Survival function of the chi-squared distribution.
double chi2_sf(double x, int dof);

double normal_cdf(double z);

// P[Binomial(n, p) <= x], exact summation in log space.
double binom_cdf(int n, double p, int x);

// Smaller of the two one-sided binomial tail probabilities at observation x.
double binom_min_tail(int n, double p, int x);

uint64_t fnv1a64(std::string_view bytes);

}  // namespace stcf
