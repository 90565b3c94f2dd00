#include "stcf/roc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stcf/stats.hpp"

namespace stcf {

SegmentCounts segment_counts(std::span<const Match> matches,
                             const SpectrometerConfig& cfg, double duration_s,
                             double segment_s, double false_center_ns) {
  if (!(segment_s > 0))
    throw std::invalid_argument("roc: segment length must be > 0");
  int n_seg = static_cast<int>(std::floor(duration_s / segment_s));
  if (n_seg < 2)
    throw std::invalid_argument("roc: need at least two segments");
  double half = cfg.tau_ns / 2;
  double sig_center = cfg.peak_offset_ns;
  if (std::abs(false_center_ns - sig_center) < cfg.tau_ns)
    throw std::invalid_argument("roc: signal and false windows overlap");

  SegmentCounts sc;
  sc.signal.assign(n_seg, 0);
  sc.falsew.assign(n_seg, 0);
  double seg_ps = segment_s * 1e12;
  for (const Match& m : matches) {
    int seg = static_cast<int>(static_cast<double>(m.sig_toa_ps) / seg_ps);
    if (seg < 0 || seg >= n_seg) continue;
    double dt = m.dt_ps * 1e-3;
    if (dt >= sig_center - half && dt < sig_center + half)
      sc.signal[seg] += 1;
    else if (dt >= false_center_ns - half && dt < false_center_ns + half)
      sc.falsew[seg] += 1;
  }
  return sc;
}

RocCurve empirical_roc(std::span<const Match> matches,
                       const SpectrometerConfig& cfg, double duration_s,
                       double segment_s, double false_center_ns) {
  SegmentCounts sc =
      segment_counts(matches, cfg, duration_s, segment_s, false_center_ns);
  int n_seg = static_cast<int>(sc.signal.size());

  uint32_t max_count = 0;
  for (uint32_t c : sc.signal) max_count = std::max(max_count, c);
  for (uint32_t c : sc.falsew) max_count = std::max(max_count, c);

  // suffix sums of the count histograms give P[count >= k] in one pass
  std::vector<uint32_t> hist_sig(max_count + 2, 0), hist_fa(max_count + 2, 0);
  for (uint32_t c : sc.signal) hist_sig[c] += 1;
  for (uint32_t c : sc.falsew) hist_fa[c] += 1;

  RocCurve curve;
  curve.segment_s = segment_s;
  curve.n_segments = n_seg;
  curve.signal_center_ns = cfg.peak_offset_ns;
  curve.false_center_ns = false_center_ns;
  curve.window_ns = cfg.tau_ns;
  curve.points.resize(max_count + 2);
  uint64_t ge_sig = 0, ge_fa = 0;
  for (int k = static_cast<int>(max_count) + 1; k >= 0; --k) {
    ge_sig += hist_sig[k];
    ge_fa += hist_fa[k];
    RocPoint& pt = curve.points[k];
    pt.threshold = k;
    pt.p_d = static_cast<double>(ge_sig) / n_seg;
    pt.p_fa = static_cast<double>(ge_fa) / n_seg;
    pt.p_d_sigma = std::sqrt(pt.p_d * (1 - pt.p_d) / n_seg);
    pt.p_fa_sigma = std::sqrt(pt.p_fa * (1 - pt.p_fa) / n_seg);
  }
  return curve;
}

RocCurve model_roc(double lambda_sig, double lambda_bg, int k_max) {
  if (lambda_sig < 0 || lambda_bg < 0)
    throw std::invalid_argument("model_roc: rates must be >= 0");
  if (k_max < 0) throw std::invalid_argument("model_roc: k_max must be >= 0");
  RocCurve curve;
  curve.points.reserve(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    RocPoint pt;
    pt.threshold = k;
    pt.p_d = poisson_tail(k, lambda_sig + lambda_bg);
    pt.p_fa = poisson_tail(k, lambda_bg);
    curve.points.push_back(pt);
  }
  return curve;
}

RocPoint operating_point(const RocCurve& curve, double target_pfa) {
  if (!(target_pfa > 0) || !(target_pfa < 1))
    throw std::invalid_argument("operating_point: target must be in (0, 1)");
  const RocPoint* best = nullptr;
  double best_d = 0;
  for (const RocPoint& pt : curve.points) {
    if (pt.p_fa <= 0) continue;
    double d = std::abs(std::log(pt.p_fa) - std::log(target_pfa));
    if (!best || d < best_d) {
      best = &pt;
      best_d = d;
    }
  }
  if (!best)
    throw std::invalid_argument("operating_point: no point with P_fa > 0");
  return *best;
}

}  // namespace stcf
