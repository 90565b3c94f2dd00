#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stcf/event_io.hpp"
#include "stcf/types.hpp"

namespace stcf {

// Pair source, jamming background, and detector timing parameters.
struct SourceParams {
  double pair_rate_P = 4e6;   // pairs/s emitted at the source
  double bg_rate_B = 6e4;     // detected background photons/s, signal arm
  double mu_s = 3e-4;         // end-to-end signal detection efficiency
  double mu_h = 0.01;         // herald detection efficiency
  double herald_center_nm = 810.0;
  double herald_fwhm_nm = 20.0;
  double alpha_px = 10.0;     // correlation-band Gaussian parameter
  double jitter_ns_rms = 5.0; // per-detection timing jitter
  double tof_delay_ns = 25.0; // signal time-of-flight offset
  double duration_s = 1.0;
  uint64_t seed = 1;

  void validate() const;
};

// Microchannel-plate intensifier response: how one photon becomes a pixel
// cluster, and the injected time-walk law.
struct IntensifierParams {
  double cluster_mean = 4.0;  // geometric hit-count law, truncated
  int cluster_max = 16;
  double tot_log_mean = 5.0106352940962555;  // ln(150)
  double tot_log_sigma = 0.8;
  int tot_min_ns = 25;
  int tot_max_ns = 2000;
  double timewalk_c0_ns = 600.0;
  double timewalk_c1_ns = 50.0;

  double timewalk_ns(double tot_ns) const {
    return timewalk_c0_ns / (tot_ns + timewalk_c1_ns);
  }
  void validate() const;
};

enum class Origin : uint8_t { Pair = 0, HeraldOnly = 1, SignalOnly = 2, Background = 3 };

// Ground truth for one detected photon, before intensifier effects.
struct Detection {
  double t_true_s = 0;   // arrival at the detector, pre-jitter (incl. tof)
  double t_det_s = 0;    // with jitter; cluster hits share this time
  double col = 0;        // continuous impact position
  double row = 0;
  Arm arm = Arm::Unassigned;
  Origin origin = Origin::Background;
  uint32_t pair_id = 0;  // nonzero only when both members were detected
};

struct SimOutput {
  std::vector<PixelHit> hits;            // sorted by (toa, col, row)
  std::vector<uint32_t> hit_detection;   // parallel to hits: detection index
  std::vector<Detection> detections;     // generation order (sorted by t_true)
};

// One generation slab handed to the streaming callback. Hits are sorted and
// chunks are non-overlapping in toa; detection_base is the global index of
// detections[0], and hit_detection holds global indices.
struct SimChunk {
  std::span<const PixelHit> hits;
  std::span<const uint32_t> hit_detection;
  std::span<const Detection> detections;
  uint64_t detection_base = 0;
};

using SimSink = std::function<void(const SimChunk&)>;

// Full model: thinned Poisson streams -> detections -> intensifier clusters
// with time walk. Deterministic in (seed, params); output is independent of
// chunking. Passing intf == nullptr selects the ideal detector (one hit per
// photon, constant ToT, no time walk).
void simulate_stream(const SourceParams& src, const IntensifierParams* intf,
                     const SpectrometerConfig& cfg, const SimSink& sink);

SimOutput simulate_full(const SourceParams& src, const IntensifierParams& intf,
                        const SpectrometerConfig& cfg);
EventFile simulate(const SourceParams& src, const IntensifierParams& intf,
                   const SpectrometerConfig& cfg);

SimOutput simulate_ideal_full(const SourceParams& src,
                              const SpectrometerConfig& cfg);
EventFile simulate_ideal(const SourceParams& src, const SpectrometerConfig& cfg);

}  // namespace stcf
