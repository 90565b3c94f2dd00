#include "stcf/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "stcf/geometry.hpp"
#include "stcf/rng.hpp"

namespace stcf {

void SourceParams::validate() const {
  if (pair_rate_P < 0) throw ConfigError("source.pair_rate_P must be >= 0");
  if (bg_rate_B < 0) throw ConfigError("source.bg_rate_B must be >= 0");
  if (mu_s < 0 || mu_s > 1) throw ConfigError("source.mu_s must be in [0, 1]");
  if (mu_h < 0 || mu_h > 1) throw ConfigError("source.mu_h must be in [0, 1]");
  if (!(alpha_px > 0)) throw ConfigError("source.alpha_px must be positive");
  if (jitter_ns_rms < 0) throw ConfigError("source.jitter_ns_rms must be >= 0");
  if (!(herald_fwhm_nm > 0))
    throw ConfigError("source.herald_spectrum.fwhm_nm must be positive");
  if (duration_s < 0) throw ConfigError("source.duration_s must be >= 0");
}

void IntensifierParams::validate() const {
  if (!(cluster_mean > 1))
    throw ConfigError("intensifier.cluster_size_law.mean must exceed 1");
  if (cluster_max < 1)
    throw ConfigError("intensifier.cluster_size_law.max must be >= 1");
  if (tot_min_ns <= 0 || tot_min_ns >= tot_max_ns || tot_max_ns > 65535)
    throw ConfigError("intensifier.tot_law range must satisfy 0 < min < max <= 65535");
  if (!(tot_log_sigma > 0))
    throw ConfigError("intensifier.tot_law.log_sigma must be positive");
  if (timewalk_c0_ns < 0)
    throw ConfigError("intensifier.timewalk_c0_ns must be >= 0");
  if (!(timewalk_c1_ns > 0))
    throw ConfigError("intensifier.timewalk_c1_ns must be positive");
}

namespace {

// Independent PRNG stream ids. Fixed forever; changing them changes output.
enum Purpose : uint64_t {
  kPairs = 1,
  kHeraldOnly = 2,
  kSignalOnly = 3,
  kBackground = 4,
  kIntensifier = 5,
};

constexpr double kFwhmToSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

struct TaggedHit {
  PixelHit hit;
  uint32_t det = 0;
};

bool tagged_less(const TaggedHit& a, const TaggedHit& b) {
  if (a.hit.toa_ps != b.hit.toa_ps) return hit_less(a.hit, b.hit);
  if (a.hit.col != b.hit.col || a.hit.row != b.hit.row)
    return hit_less(a.hit, b.hit);
  if (a.hit.tot_ns != b.hit.tot_ns) return a.hit.tot_ns < b.hit.tot_ns;
  return a.det < b.det;
}

// Interior margin keeping whole clusters (and hence centroids) inside the
// stripe, so arm assignment never leaks detections.
constexpr double kRowMargin = 2.0;

struct SlabContext {
  const SourceParams& src;
  const SpectrometerConfig& cfg;
  double herald_sigma_nm;
  double col_sigma_px;
  double jitter_s;
  double tof_s;

  double draw_herald_lambda(Rng& rng) const {
    for (;;) {
      double nm = src.herald_center_nm + herald_sigma_nm * rng.gaussian();
      if (nm >= cfg.lambda_min_nm && nm <= cfg.lambda_max_nm) return nm;
    }
  }
  double draw_row(Rng& rng, const RowBand& band) const {
    return rng.uniform(band.lo + kRowMargin, band.hi - kRowMargin);
  }
};

// The photon cluster occupies the k lattice pixels nearest the continuous
// impact point; k <= 16 always fits in the 5x5 window around it.
int nearest_pixels(double col, double row, int k, int* out_c, int* out_r) {
  struct Cand {
    double d2;
    int c, r;
  };
  Cand cand[25];
  int n = 0;
  int cc = static_cast<int>(std::lround(col));
  int rc = static_cast<int>(std::lround(row));
  for (int dr = -2; dr <= 2; ++dr) {
    int r = rc + dr;
    if (r < 0 || r > 255) continue;
    for (int dc = -2; dc <= 2; ++dc) {
      int c = cc + dc;
      if (c < 0 || c > 255) continue;
      double d2 = (c - col) * (c - col) + (r - row) * (r - row);
      cand[n++] = {d2, c, r};
    }
  }
  auto less = [](const Cand& a, const Cand& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.c != b.c) return a.c < b.c;
    return a.r < b.r;
  };
  // insertion sort; n <= 25
  for (int i = 1; i < n; ++i) {
    Cand key = cand[i];
    int j = i - 1;
    while (j >= 0 && less(key, cand[j])) {
      cand[j + 1] = cand[j];
      --j;
    }
    cand[j + 1] = key;
  }
  if (k > n) k = n;
  for (int i = 0; i < k; ++i) {
    out_c[i] = cand[i].c;
    out_r[i] = cand[i].r;
  }
  return k;
}

int64_t to_ps(double t_s, double extra_ns) {
  return static_cast<int64_t>(std::llround(t_s * 1e12 + extra_ns * 1e3));
}

}  // namespace

void simulate_stream(const SourceParams& src, const IntensifierParams* intf,
                     const SpectrometerConfig& cfg, const SimSink& sink) {
  src.validate();
  if (intf) intf->validate();
  cfg.validate();

  const double T = src.duration_s;
  const SlabContext ctx{
      src,
      cfg,
      src.herald_fwhm_nm / kFwhmToSigma,
      src.alpha_px * 0.5,  // band profile exp(-2 (x/alpha)^2) has sigma alpha/2
      src.jitter_ns_rms * 1e-9,
      src.tof_delay_ns * 1e-9,
  };

  const double r_both = src.pair_rate_P * src.mu_s * src.mu_h;
  const double r_herald_only = src.pair_rate_P * src.mu_h * (1.0 - src.mu_s);
  const double r_signal_only = src.pair_rate_P * src.mu_s * (1.0 - src.mu_h);
  const double r_bg = src.bg_rate_B;

  const int nslabs = static_cast<int>(std::ceil(T));
  uint32_t next_pair_id = 1;
  uint64_t det_base = 0;

  std::vector<TaggedHit> pending;  // sorted carry across slab boundaries
  std::vector<Detection> dets;
  std::vector<TaggedHit> slab_hits;
  std::vector<PixelHit> out_hits;
  std::vector<uint32_t> out_tags;

  for (int s = 0; s < nslabs; ++s) {
    const double t0 = s;
    const double t1 = std::min(static_cast<double>(s) + 1.0, T);
    dets.clear();

    // Both members detected: correlated herald + signal detections.
    if (r_both > 0) {
      Rng rng(derive_seed(src.seed, kPairs, s));
      for (double t = t0 + rng.exponential(r_both); t < t1;
           t += rng.exponential(r_both)) {
        double lambda_h = ctx.draw_herald_lambda(rng);
        double her_col = column_at_wavelength(lambda_h, cfg);
        double her_row = ctx.draw_row(rng, cfg.herald_rows);
        double her_jit = ctx.jitter_s * rng.gaussian();
        double sig_col =
            column_at_wavelength(
                conjugate_wavelength(lambda_h, cfg.lambda_pump_nm), cfg) +
            ctx.col_sigma_px * rng.gaussian();
        double sig_row = ctx.draw_row(rng, cfg.signal_rows);
        double sig_jit = ctx.jitter_s * rng.gaussian();
        bool signal_on_camera = sig_col >= 0.0 && sig_col <= 255.0;
        uint32_t id = signal_on_camera ? next_pair_id++ : 0;
        dets.push_back({t, t + her_jit, her_col, her_row, Arm::Herald,
                        Origin::Pair, id});
        if (signal_on_camera)
          dets.push_back({t + ctx.tof_s, t + ctx.tof_s + sig_jit, sig_col,
                          sig_row, Arm::Signal, Origin::Pair, id});
      }
    }
    // Herald detected, signal missed.
    if (r_herald_only > 0) {
      Rng rng(derive_seed(src.seed, kHeraldOnly, s));
      for (double t = t0 + rng.exponential(r_herald_only); t < t1;
           t += rng.exponential(r_herald_only)) {
        double lambda_h = ctx.draw_herald_lambda(rng);
        double col = column_at_wavelength(lambda_h, cfg);
        double row = ctx.draw_row(rng, cfg.herald_rows);
        double jit = ctx.jitter_s * rng.gaussian();
        dets.push_back({t, t + jit, col, row, Arm::Herald, Origin::HeraldOnly, 0});
      }
    }
    // Signal detected, herald missed.
    if (r_signal_only > 0) {
      Rng rng(derive_seed(src.seed, kSignalOnly, s));
      for (double t = t0 + rng.exponential(r_signal_only); t < t1;
           t += rng.exponential(r_signal_only)) {
        double lambda_h = ctx.draw_herald_lambda(rng);
        double col = column_at_wavelength(
                         conjugate_wavelength(lambda_h, cfg.lambda_pump_nm), cfg) +
                     ctx.col_sigma_px * rng.gaussian();
        double row = ctx.draw_row(rng, cfg.signal_rows);
        double jit = ctx.jitter_s * rng.gaussian();
        if (col < 0.0 || col > 255.0) continue;
        double tt = t + ctx.tof_s;
        dets.push_back({tt, tt + jit, col, row, Arm::Signal, Origin::SignalOnly, 0});
      }
    }
    // Jamming background, signal stripe only, spectrally flat.
    if (r_bg > 0) {
      Rng rng(derive_seed(src.seed, kBackground, s));
      for (double t = t0 + rng.exponential(r_bg); t < t1;
           t += rng.exponential(r_bg)) {
        double col = rng.uniform(0.0, 256.0) - 0.5;
        double row = ctx.draw_row(rng, cfg.signal_rows);
        double jit = ctx.jitter_s * rng.gaussian();
        dets.push_back({t, t + jit, col, row, Arm::Signal, Origin::Background, 0});
      }
    }

    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
      if (a.t_true_s != b.t_true_s) return a.t_true_s < b.t_true_s;
      if (a.origin != b.origin) return a.origin < b.origin;
      if (a.arm != b.arm) return a.arm < b.arm;
      return a.col < b.col;
    });

    // Intensifier expansion, consuming one stream in detection order.
    slab_hits.clear();
    {
      Rng rng(derive_seed(src.seed, kIntensifier, s));
      int pc[25], pr[25];
      for (size_t d = 0; d < dets.size(); ++d) {
        const Detection& det = dets[d];
        uint32_t tag = static_cast<uint32_t>(det_base + d);
        if (intf) {
          int k = rng.geometric_trunc(intf->cluster_mean, intf->cluster_max);
          k = nearest_pixels(det.col, det.row, k, pc, pr);
          for (int i = 0; i < k; ++i) {
            int tot = rng.lognormal_tot_ns(intf->tot_log_mean, intf->tot_log_sigma,
                                           intf->tot_min_ns, intf->tot_max_ns);
            slab_hits.push_back(
                {{static_cast<uint16_t>(pc[i]), static_cast<uint16_t>(pr[i]),
                  to_ps(det.t_det_s, intf->timewalk_ns(tot)),
                  static_cast<uint16_t>(tot)},
                 tag});
          }
        } else {
          int c = std::clamp(static_cast<int>(std::lround(det.col)), 0, 255);
          int r = std::clamp(static_cast<int>(std::lround(det.row)), 0, 255);
          slab_hits.push_back({{static_cast<uint16_t>(c),
                                static_cast<uint16_t>(r),
                                to_ps(det.t_det_s, 0.0), 100},
                               tag});
        }
      }
    }

    pending.insert(pending.end(), slab_hits.begin(), slab_hits.end());
    std::sort(pending.begin(), pending.end(), tagged_less);

    // Jitter, walk, and time of flight push hits < 1 us past the slab edge,
    // so everything older than t1 - 1 us is final.
    int64_t cutoff_ps = static_cast<int64_t>((t1 - 1e-6) * 1e12);
    size_t keep = pending.size();
    if (s + 1 < nslabs) {
      keep = 0;
      while (keep < pending.size() && pending[keep].hit.toa_ps < cutoff_ps) ++keep;
    }
    out_hits.clear();
    out_tags.clear();
    out_hits.reserve(keep);
    out_tags.reserve(keep);
    for (size_t i = 0; i < keep; ++i) {
      out_hits.push_back(pending[i].hit);
      out_tags.push_back(pending[i].det);
    }
    pending.erase(pending.begin(), pending.begin() + keep);

    sink(SimChunk{out_hits, out_tags, dets, det_base});
    det_base += dets.size();
  }

  if (!pending.empty()) {
    out_hits.clear();
    out_tags.clear();
    for (const TaggedHit& th : pending) {
      out_hits.push_back(th.hit);
      out_tags.push_back(th.det);
    }
    sink(SimChunk{out_hits, out_tags, {}, det_base});
  }
}

SimOutput simulate_full(const SourceParams& src, const IntensifierParams& intf,
                        const SpectrometerConfig& cfg) {
  SimOutput out;
  simulate_stream(src, &intf, cfg, [&](const SimChunk& chunk) {
    out.hits.insert(out.hits.end(), chunk.hits.begin(), chunk.hits.end());
    out.hit_detection.insert(out.hit_detection.end(),
                             chunk.hit_detection.begin(),
                             chunk.hit_detection.end());
    out.detections.insert(out.detections.end(), chunk.detections.begin(),
                          chunk.detections.end());
  });
  return out;
}

EventFile simulate(const SourceParams& src, const IntensifierParams& intf,
                   const SpectrometerConfig& cfg) {
  EventFile file;
  simulate_stream(src, &intf, cfg, [&](const SimChunk& chunk) {
    file.hits.insert(file.hits.end(), chunk.hits.begin(), chunk.hits.end());
  });
  return file;
}

SimOutput simulate_ideal_full(const SourceParams& src,
                              const SpectrometerConfig& cfg) {
  SimOutput out;
  simulate_stream(src, nullptr, cfg, [&](const SimChunk& chunk) {
    out.hits.insert(out.hits.end(), chunk.hits.begin(), chunk.hits.end());
    out.hit_detection.insert(out.hit_detection.end(),
                             chunk.hit_detection.begin(),
                             chunk.hit_detection.end());
    out.detections.insert(out.detections.end(), chunk.detections.begin(),
                          chunk.detections.end());
  });
  return out;
}

EventFile simulate_ideal(const SourceParams& src, const SpectrometerConfig& cfg) {
  EventFile file;
  simulate_stream(src, nullptr, cfg, [&](const SimChunk& chunk) {
    file.hits.insert(file.hits.end(), chunk.hits.begin(), chunk.hits.end());
  });
  return file;
}

}  // namespace stcf
