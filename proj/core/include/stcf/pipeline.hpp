#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stcf/types.hpp"

namespace stcf {

struct PipelineParams {
  double cluster_window_ns = 100.0;  // max ToA gap between adjacent hits
  int tot_bins = 16;                 // log-spaced bins per ToT axis
  double tot_bin_lo_ns = 25.0;
  double tot_bin_hi_ns = 2000.0;
  int min_samples = 20;              // cells below this apply no correction
  enum class AnchorMode { MaxTot, NearestCentroid };
  AnchorMode anchor_mode = AnchorMode::MaxTot;

  void validate() const;
};

// Connected component of hits: Chebyshev distance <= 1 and ToA gap <=
// cluster_window along some spanning sequence.
struct Cluster {
  std::vector<PixelHit> hits;     // arrival order
  std::vector<uint32_t> hit_tag;  // caller-supplied tag per hit (input index)
  double centroid_col = 0;        // ToT-weighted
  double centroid_row = 0;
  int anchor = 0;                 // index into hits
  int64_t raw_toa_ps = 0;         // anchor ToA

  uint16_t anchor_tot() const { return hits[anchor].tot_ns; }
  size_t size() const { return hits.size(); }
};

class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// 2-D (hit ToT bin, anchor ToT bin) lookup of mean relative ToA offsets,
// plus a per-bin absolute time-walk column referenced to the largest
// well-sampled anchor bin (where the walk has decayed to ~0).
class TimewalkTable {
 public:
  TimewalkTable() = default;
  TimewalkTable(int bins, double lo_ns, double hi_ns, int min_samples);

  static TimewalkTable identity(const PipelineParams& p);

  int bins() const { return bins_; }
  int min_samples() const { return min_samples_; }
  int bin_of(double tot_ns) const;
  double bin_center_ns(int bin) const;

  uint32_t cell_count(int hit_bin, int anchor_bin) const;
  // Mean (hit ToA - anchor ToA) of the cell; 0 when under-sampled.
  double cell_mean_ns(int hit_bin, int anchor_bin) const;
  double cell_sem_ns(int hit_bin, int anchor_bin) const;
  // Absolute walk of the bin, from the large-ToT zero reference.
  double absolute_walk_ns(int bin) const;
  int reference_bin() const { return reference_bin_; }

  // Correction subtracted from a hit's ToA given its ToT and its cluster
  // anchor's ToT. Identity (0) for under-sampled cells.
  double correction_ns(double hit_tot_ns, double anchor_tot_ns) const;

  void accumulate(double hit_tot_ns, double anchor_tot_ns, double delta_ns);
  void merge(const TimewalkTable& other);
  // Computes means and the absolute-walk column; call after accumulation.
  void finalize();

  std::string to_json_string() const;
  static TimewalkTable from_json_string(const std::string& text);

 private:
  int bins_ = 0;
  double lo_ns_ = 0, hi_ns_ = 0;
  double log_lo_ = 0, log_step_ = 0;
  int min_samples_ = 0;
  int reference_bin_ = -1;
  bool finalized_ = false;
  std::vector<uint32_t> count_;
  std::vector<double> sum_;
  std::vector<double> sumsq_;
  std::vector<double> mean_;
  std::vector<double> abs_walk_;
};

// Streaming single-linkage clusterer over a toa-sorted hit stream.
// Finalized clusters are handed to the sink; flush() at end of stream.
class ClusterStream {
 public:
  ClusterStream(const PipelineParams& p, std::function<void(Cluster&&)> sink);
  ~ClusterStream();
  void push(const PixelHit& hit, uint32_t tag);
  void flush();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Batch clustering; output sorted by (raw_toa, first hit). hit_tag holds
// indices into `hits`. nthreads > 1 splits at ToA gaps > cluster_window, so
// the partition equals the sequential one.
std::vector<Cluster> cluster(std::span<const PixelHit> hits,
                             const PipelineParams& p, int nthreads = 1);

// Accumulates (hit ToT, anchor ToT) -> mean relative offset from every
// multi-hit cluster. Throws CalibrationError if none exist.
TimewalkTable calibrate_timewalk(std::span<const Cluster> clusters,
                                 const PipelineParams& p);

// Cluster -> PhotonEvent: anchor ToA minus the table's anchor
// self-correction, ToT-weighted centroid rounded to the nearest pixel (ties
// toward the smaller index), arm from the configured row bands.
std::vector<PhotonEvent> correct_and_centroid(std::span<const Cluster> clusters,
                                              const TimewalkTable& table,
                                              const SpectrometerConfig& cfg);
PhotonEvent correct_one(const Cluster& c, const TimewalkTable& table,
                        const SpectrometerConfig& cfg);

// Fused clustering + correction + centroiding without materializing
// clusters; equals cluster() then correct_and_centroid() followed by an
// event sort. This is the high-rate path.
std::vector<PhotonEvent> process_hits(std::span<const PixelHit> hits,
                                      const TimewalkTable& table,
                                      const SpectrometerConfig& cfg,
                                      const PipelineParams& p,
                                      int nthreads = 1);

}  // namespace stcf
