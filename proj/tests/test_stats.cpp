#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "stcf/stats.hpp"

using namespace stcf;

namespace {

// Direct Poisson tail by term summation; valid for the small rates used here.
double tail_direct(int k, double lambda) {
  double term = std::exp(-lambda);
  double below = 0;
  for (int n = 0; n < k; ++n) {
    below += term;
    term *= lambda / (n + 1);
  }
  return 1.0 - below;
}

}  // namespace

TEST_CASE("poisson tail agrees with direct summation") {
  for (double lambda : {0.5, 1.1173, 5.3, 21.43551488}) {
    for (int k = 0; k <= 40; ++k) {
      double expect = tail_direct(k, lambda);
      double got = poisson_tail(k, lambda);
      CHECK(got == doctest::Approx(expect).epsilon(1e-11));
    }
  }
}

TEST_CASE("poisson tail pinned values") {
  CHECK(poisson_tail(6, 1.1173) ==
        doctest::Approx(0.00104754791800963).epsilon(1e-12));
  CHECK(poisson_tail(6, 1.12548228) ==
        doctest::Approx(0.00108694593699066).epsilon(1e-12));
  CHECK(poisson_tail(38, 21.43551488) ==
        doctest::Approx(0.000772757023263531).epsilon(1e-12));
}

TEST_CASE("poisson tail edge cases") {
  CHECK(poisson_tail(0, 3.0) == 1.0);
  CHECK(poisson_tail(-5, 3.0) == 1.0);
  CHECK(poisson_tail(1, 0.0) == 0.0);
  CHECK(poisson_tail(0, 0.0) == 1.0);
  // monotone decreasing in k, increasing in lambda
  double prev = 2;
  for (int k = 0; k < 30; ++k) {
    double t = poisson_tail(k, 4.0);
    CHECK(t <= prev);
    prev = t;
  }
  CHECK(poisson_tail(5, 2.0) < poisson_tail(5, 3.0));
}

TEST_CASE("chi-squared survival function") {
  // dof 2 reduces to exp(-x/2) exactly
  for (double x = 0.1; x < 30; x += 0.9)
    CHECK(chi2_sf(x, 2) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-12));
  // dof 1 reduces to erfc(sqrt(x/2))
  for (double x = 0.1; x < 30; x += 0.9)
    CHECK(chi2_sf(x, 1) ==
          doctest::Approx(std::erfc(std::sqrt(x / 2))).epsilon(1e-11));
  CHECK(chi2_sf(1.0, 1) == doctest::Approx(0.3173105078629141).epsilon(1e-12));
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.0) ==
        doctest::Approx(0.8413447460685429).epsilon(1e-14));
  for (double z = -4; z <= 4; z += 0.25)
    CHECK(normal_cdf(z) + normal_cdf(-z) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("binomial cdf against exact enumeration") {
  // n = 10, p = 1/2: probabilities are exact multiples of 2^-10
  CHECK(binom_cdf(10, 0.5, 3) == doctest::Approx(0.171875).epsilon(1e-12));
  CHECK(binom_cdf(10, 0.5, 10) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binom_cdf(10, 0.5, -1) == doctest::Approx(0.0));

  auto direct = [](int n, double p, int x) {
    double acc = 0;
    for (int k = 0; k <= x; ++k) {
      double c = 1;
      for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
      acc += c * std::pow(p, k) * std::pow(1 - p, n - k);
    }
    return acc;
  };
  for (int n : {5, 17, 30})
    for (double p : {0.02, 0.3, 0.77})
      for (int x = 0; x <= n; ++x)
        CHECK(binom_cdf(n, p, x) ==
              doctest::Approx(direct(n, p, x)).epsilon(1e-10));
}

TEST_CASE("binomial min tail is the smaller of the two tails") {
  // symmetric at the center
  CHECK(binom_min_tail(10, 0.5, 5) > 0.5);
  // far tails are small and equal the corresponding one-sided tail
  CHECK(binom_min_tail(100, 0.5, 10) ==
        doctest::Approx(binom_cdf(100, 0.5, 10)).epsilon(1e-12));
  CHECK(binom_min_tail(100, 0.5, 90) ==
        doctest::Approx(1.0 - binom_cdf(100, 0.5, 89)).epsilon(1e-9));
}

TEST_CASE("fnv1a64 matches the reference vectors") {
  // published test vectors for 64-bit FNV-1a
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(fnv1a64("ab") != fnv1a64("ba"));
}
