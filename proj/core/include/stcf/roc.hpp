#pragma once

#include <span>
#include <vector>

#include "stcf/coincidence.hpp"
#include "stcf/types.hpp"

namespace stcf {

struct RocPoint {
  int threshold = 0;      // integer count threshold k; detect when count >= k
  double p_d = 0;
  double p_d_sigma = 0;
  double p_fa = 0;
  double p_fa_sigma = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // threshold ascending
  double segment_s = 0;
  int n_segments = 0;
  double signal_center_ns = 0;
  double false_center_ns = 0;
  double window_ns = 0;
};

// Splits the run into floor(duration/segment) segments and counts matches in
// a signal window (width tau at the expected peak) and a same-width false
// window. P_d(k)/P_fa(k) are segment fractions with count >= k; sigmas are
// binomial. Matches must already carry any selection-band filtering. Throws
// std::invalid_argument when the windows overlap or fewer than two segments
// fit.
RocCurve empirical_roc(std::span<const Match> matches,
                       const SpectrometerConfig& cfg, double duration_s,
                       double segment_s, double false_center_ns = 75.0);

// Poisson counting model: P_d(k) = P[Pois(l_sig + l_bg) >= k],
// P_fa(k) = P[Pois(l_bg) >= k].
RocCurve model_roc(double lambda_sig, double lambda_bg, int k_max);

// The curve point whose P_fa is closest to target in log space (points with
// P_fa == 0 are skipped).
RocPoint operating_point(const RocCurve& curve, double target_pfa);

// Segment counts underlying an empirical curve; exposed for tests.
struct SegmentCounts {
  std::vector<uint32_t> signal;
  std::vector<uint32_t> falsew;
};
SegmentCounts segment_counts(std::span<const Match> matches,
                             const SpectrometerConfig& cfg, double duration_s,
                             double segment_s, double false_center_ns);

}  // namespace stcf
