#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "stcf/roc.hpp"
#include "stcf/stats.hpp"

using namespace stcf;

namespace {

const SpectrometerConfig kCfg{};

Match at(double toa_s, double dt_ns) {
  Match m;
  m.sig_toa_ps = static_cast<int64_t>(toa_s * 1e12);
  m.dt_ps = static_cast<int64_t>(dt_ns * 1e3);
  return m;
}

}  // namespace

TEST_CASE("segment counting places matches in the right windows") {
  // signal window [15, 35) ns, false window [65, 85) ns, 0.5 s segments
  std::vector<Match> ms{
      at(0.1, 25.0),   // seg 0, signal
      at(0.2, 15.0),   // seg 0, signal (inclusive lower edge)
      at(0.3, 35.0),   // seg 0, neither (exclusive upper edge)
      at(0.6, 70.0),   // seg 1, false
      at(0.7, 64.9),   // seg 1, neither
      at(1.4, 25.0),   // seg 2, signal
      at(1.4, 80.0),   // seg 2, false
      at(2.05, 25.0),  // beyond the last whole segment: dropped
  };
  SegmentCounts sc = segment_counts(ms, kCfg, 2.0, 0.5, 75.0);
  REQUIRE(sc.signal.size() == 4);
  REQUIRE(sc.falsew.size() == 4);
  CHECK(sc.signal[0] == 2);
  CHECK(sc.falsew[0] == 0);
  CHECK(sc.signal[1] == 0);
  CHECK(sc.falsew[1] == 1);
  CHECK(sc.signal[2] == 1);
  CHECK(sc.falsew[2] == 1);
  CHECK(sc.signal[3] == 0);
  CHECK(sc.falsew[3] == 0);
}

TEST_CASE("empirical curve is the exceedance staircase of the counts") {
  std::vector<Match> ms;
  // segment signal counts 3,1,0,2; false counts 1,0,0,0
  auto fill = [&](int seg, int nsig, int nfa) {
    for (int k = 0; k < nsig; ++k) ms.push_back(at(seg * 0.5 + 0.1, 25.0));
    for (int k = 0; k < nfa; ++k) ms.push_back(at(seg * 0.5 + 0.1, 75.0));
  };
  fill(0, 3, 1);
  fill(1, 1, 0);
  fill(3, 2, 0);
  RocCurve c = empirical_roc(ms, kCfg, 2.0, 0.5);
  CHECK(c.n_segments == 4);
  REQUIRE(c.points.size() >= 5);  // k = 0 .. max_count+1

  auto pt = [&](int k) {
    for (const auto& p : c.points)
      if (p.threshold == k) return p;
    REQUIRE(false);
    return RocPoint{};
  };
  CHECK(pt(0).p_d == 1.0);
  CHECK(pt(0).p_fa == 1.0);
  CHECK(pt(1).p_d == doctest::Approx(0.75));
  CHECK(pt(1).p_fa == doctest::Approx(0.25));
  CHECK(pt(2).p_d == doctest::Approx(0.5));
  CHECK(pt(2).p_fa == 0.0);
  CHECK(pt(3).p_d == doctest::Approx(0.25));
  CHECK(pt(4).p_d == 0.0);
  // binomial error bar at p = 0.75, n = 4
  CHECK(pt(1).p_d_sigma ==
        doctest::Approx(std::sqrt(0.75 * 0.25 / 4.0)).epsilon(1e-12));

  // monotone: larger threshold never raises either probability
  for (size_t i = 1; i < c.points.size(); ++i) {
    CHECK(c.points[i].p_d <= c.points[i - 1].p_d);
    CHECK(c.points[i].p_fa <= c.points[i - 1].p_fa);
  }
}

TEST_CASE("model curve matches the Poisson tail") {
  double ls = 4.4440, lb = 1.12548228;
  RocCurve c = model_roc(ls, lb, 20);
  REQUIRE(c.points.size() == 21);
  for (const auto& p : c.points) {
    CHECK(p.p_d ==
          doctest::Approx(poisson_tail(p.threshold, ls + lb)).epsilon(1e-12));
    CHECK(p.p_fa ==
          doctest::Approx(poisson_tail(p.threshold, lb)).epsilon(1e-12));
    CHECK(p.p_d >= p.p_fa);  // adding signal can only help
  }
  // the reference operating point of the narrow-band analysis
  RocPoint op = operating_point(c, 1e-3);
  CHECK(op.threshold == 6);
  CHECK(op.p_fa == doctest::Approx(1.08694593699066e-3).epsilon(1e-9));
  CHECK(op.p_d == doctest::Approx(0.482951523516380).epsilon(1e-9));

  RocCurve wide = model_roc(5.3, 21.43551488, 60);
  RocPoint opw = operating_point(wide, 1e-3);
  CHECK(opw.threshold == 38);
  CHECK(opw.p_fa == doctest::Approx(7.7276e-4).epsilon(1e-3));
  CHECK(opw.p_d == doctest::Approx(0.02319).epsilon(1e-3));
}

TEST_CASE("operating point picks the log-nearest false-alarm rate") {
  RocCurve c;
  c.points.push_back({1, 1.0, 0, 1e-2, 0});
  c.points.push_back({2, 0.8, 0, 1e-4, 0});
  c.points.push_back({3, 0.5, 0, 0.0, 0});
  // 1e-3 is equidistant in log space; implementation keeps the first found.
  // Make it unambiguous instead:
  RocPoint op = operating_point(c, 2e-3);
  CHECK(op.threshold == 1);
  op = operating_point(c, 4e-4);
  CHECK(op.threshold == 2);
  // zero-P_fa points are never selected even if the target is tiny
  op = operating_point(c, 1e-12);
  CHECK(op.threshold == 2);

  RocCurve zeros;
  zeros.points.push_back({1, 1.0, 0, 0.0, 0});
  CHECK_THROWS_AS(operating_point(zeros, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(operating_point(c, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(operating_point(c, 1.5), std::invalid_argument);
}

TEST_CASE("window layout validation") {
  std::vector<Match> ms{at(0.1, 25.0), at(0.6, 25.0), at(1.1, 25.0)};
  // false window too close: |45 - 25| < tau
  CHECK_THROWS_AS(segment_counts(ms, kCfg, 2.0, 0.5, 44.9),
                  std::invalid_argument);
  CHECK_NOTHROW(segment_counts(ms, kCfg, 2.0, 0.5, 45.0));
  // fewer than two whole segments
  CHECK_THROWS_AS(segment_counts(ms, kCfg, 0.6, 0.5, 75.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(segment_counts(ms, kCfg, 2.0, 0.0, 75.0),
                  std::invalid_argument);
}
