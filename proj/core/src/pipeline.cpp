#include "stcf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <thread>

#include <nlohmann/json.hpp>

namespace stcf {

void PipelineParams::validate() const {
  if (!(cluster_window_ns > 0))
    throw ConfigError("pipeline.cluster_window_ns must be positive");
  if (tot_bins < 2) throw ConfigError("pipeline.tot_bins must be >= 2");
  if (!(tot_bin_lo_ns > 0) || !(tot_bin_lo_ns < tot_bin_hi_ns))
    throw ConfigError("pipeline.tot_bin range must satisfy 0 < lo < hi");
  if (min_samples < 1) throw ConfigError("pipeline.min_samples must be >= 1");
}

// ---------------------------------------------------------------------------
// TimewalkTable

TimewalkTable::TimewalkTable(int bins, double lo_ns, double hi_ns,
                             int min_samples)
    : bins_(bins),
      lo_ns_(lo_ns),
      hi_ns_(hi_ns),
      log_lo_(std::log(lo_ns)),
      log_step_((std::log(hi_ns) - std::log(lo_ns)) / bins),
      min_samples_(min_samples),
      count_(static_cast<size_t>(bins) * bins, 0),
      sum_(static_cast<size_t>(bins) * bins, 0.0),
      sumsq_(static_cast<size_t>(bins) * bins, 0.0),
      mean_(static_cast<size_t>(bins) * bins, 0.0),
      abs_walk_(bins, 0.0) {}

TimewalkTable TimewalkTable::identity(const PipelineParams& p) {
  TimewalkTable t(p.tot_bins, p.tot_bin_lo_ns, p.tot_bin_hi_ns, p.min_samples);
  t.finalized_ = true;
  return t;
}

int TimewalkTable::bin_of(double tot_ns) const {
  int b = static_cast<int>((std::log(tot_ns) - log_lo_) / log_step_);
  return std::clamp(b, 0, bins_ - 1);
}

double TimewalkTable::bin_center_ns(int bin) const {
  return std::exp(log_lo_ + (bin + 0.5) * log_step_);
}

uint32_t TimewalkTable::cell_count(int hit_bin, int anchor_bin) const {
  return count_[static_cast<size_t>(hit_bin) * bins_ + anchor_bin];
}

double TimewalkTable::cell_mean_ns(int hit_bin, int anchor_bin) const {
  return mean_[static_cast<size_t>(hit_bin) * bins_ + anchor_bin];
}

double TimewalkTable::cell_sem_ns(int hit_bin, int anchor_bin) const {
  size_t i = static_cast<size_t>(hit_bin) * bins_ + anchor_bin;
  uint32_t n = count_[i];
  if (n < 2) return 0.0;
  double var = (sumsq_[i] - sum_[i] * sum_[i] / n) / (n - 1.0);
  return std::sqrt(std::max(var, 0.0) / n);
}

double TimewalkTable::absolute_walk_ns(int bin) const { return abs_walk_[bin]; }

double TimewalkTable::correction_ns(double hit_tot_ns,
                                    double anchor_tot_ns) const {
  if (bins_ == 0) return 0.0;
  int p = bin_of(hit_tot_ns);
  int a = bin_of(anchor_tot_ns);
  size_t i = static_cast<size_t>(p) * bins_ + a;
  double rel =
      count_[i] >= static_cast<uint32_t>(min_samples_) ? mean_[i] : 0.0;
  return rel + abs_walk_[a];
}

void TimewalkTable::accumulate(double hit_tot_ns, double anchor_tot_ns,
                               double delta_ns) {
  size_t i = static_cast<size_t>(bin_of(hit_tot_ns)) * bins_ + bin_of(anchor_tot_ns);
  count_[i] += 1;
  sum_[i] += delta_ns;
  sumsq_[i] += delta_ns * delta_ns;
  finalized_ = false;
}

void TimewalkTable::merge(const TimewalkTable& other) {
  if (other.bins_ != bins_) throw std::invalid_argument("timewalk bin mismatch");
  for (size_t i = 0; i < count_.size(); ++i) {
    count_[i] += other.count_[i];
    sum_[i] += other.sum_[i];
    sumsq_[i] += other.sumsq_[i];
  }
  finalized_ = false;
}

void TimewalkTable::finalize() {
  for (size_t i = 0; i < count_.size(); ++i)
    mean_[i] = count_[i] > 0 ? sum_[i] / count_[i] : 0.0;

  // Reference: the largest anchor bin with enough statistics. Anchors there
  // carry the largest deposited energies, where the walk has decayed to ~0,
  // so offsets against them read out the absolute walk per hit bin.
  reference_bin_ = -1;
  for (int a = bins_ - 1; a >= 0; --a) {
    uint64_t col = 0;
    for (int p = 0; p < bins_; ++p) col += cell_count(p, a);
    if (col >= static_cast<uint64_t>(min_samples_)) {
      reference_bin_ = a;
      break;
    }
  }
  for (int p = 0; p < bins_; ++p) {
    abs_walk_[p] = 0.0;
    if (reference_bin_ >= 0 &&
        cell_count(p, reference_bin_) >= static_cast<uint32_t>(min_samples_))
      abs_walk_[p] = cell_mean_ns(p, reference_bin_);
  }
  finalized_ = true;
}

std::string TimewalkTable::to_json_string() const {
  nlohmann::json j;
  j["bins"] = bins_;
  j["tot_lo_ns"] = lo_ns_;
  j["tot_hi_ns"] = hi_ns_;
  j["min_samples"] = min_samples_;
  j["reference_bin"] = reference_bin_;
  j["count"] = count_;
  j["sum"] = sum_;
  j["sumsq"] = sumsq_;
  std::vector<double> edges(bins_ + 1);
  for (int i = 0; i <= bins_; ++i) edges[i] = std::exp(log_lo_ + i * log_step_);
  j["bin_edges_ns"] = edges;
  std::vector<double> means(mean_);
  j["mean_ns"] = means;
  j["absolute_walk_ns"] = abs_walk_;
  return j.dump(2);
}

TimewalkTable TimewalkTable::from_json_string(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TimewalkTable t(j.at("bins").get<int>(), j.at("tot_lo_ns").get<double>(),
                  j.at("tot_hi_ns").get<double>(),
                  j.at("min_samples").get<int>());
  t.count_ = j.at("count").get<std::vector<uint32_t>>();
  t.sum_ = j.at("sum").get<std::vector<double>>();
  t.sumsq_ = j.at("sumsq").get<std::vector<double>>();
  size_t want = static_cast<size_t>(t.bins_) * t.bins_;
  if (t.count_.size() != want || t.sum_.size() != want ||
      t.sumsq_.size() != want)
    throw std::invalid_argument("timewalk table: wrong cell count");
  t.finalize();
  return t;
}

// ---------------------------------------------------------------------------
// Streaming clusterer

namespace {

constexpr int64_t kNeverSeen = INT64_MIN / 4;
constexpr uint32_t kNoSlot = UINT32_MAX;

struct OpenCluster {
  std::vector<PixelHit> hits;
  std::vector<uint32_t> tags;
  int64_t max_toa = 0;
  uint32_t parent = 0;      // union-find; self when root
  uint32_t child_head = kNoSlot;  // absorbed slots, freed with the root
  uint32_t child_tail = kNoSlot;
  uint32_t next_child = kNoSlot;
  uint32_t gen = 0;
  bool live = false;
};

}  // namespace

struct ClusterStream::Impl {
  PipelineParams params;
  int64_t window_ps;
  std::function<void(Cluster&&)> sink;

  std::vector<int64_t> last_toa;
  std::vector<uint32_t> last_slot;
  std::vector<OpenCluster> slots;
  std::vector<uint32_t> free_list;
  std::deque<std::pair<uint32_t, uint32_t>> fifo;  // (slot, gen) at creation

  Impl(const PipelineParams& p, std::function<void(Cluster&&)> s)
      : params(p),
        window_ps(static_cast<int64_t>(std::llround(p.cluster_window_ns * 1e3))),
        sink(std::move(s)),
        last_toa(kGridSize * kGridSize, kNeverSeen),
        last_slot(kGridSize * kGridSize, kNoSlot) {}

  uint32_t find(uint32_t s) {
    while (slots[s].parent != s) {
      slots[s].parent = slots[slots[s].parent].parent;
      s = slots[s].parent;
    }
    return s;
  }

  uint32_t alloc() {
    uint32_t s;
    if (!free_list.empty()) {
      s = free_list.back();
      free_list.pop_back();
    } else {
      s = static_cast<uint32_t>(slots.size());
      slots.emplace_back();
    }
    OpenCluster& oc = slots[s];
    oc.hits.clear();
    oc.tags.clear();
    oc.parent = s;
    oc.child_head = oc.child_tail = oc.next_child = kNoSlot;
    oc.live = true;
    return s;
  }

  void absorb(uint32_t root, uint32_t child) {
    OpenCluster& r = slots[root];
    OpenCluster& c = slots[child];
    r.hits.insert(r.hits.end(), c.hits.begin(), c.hits.end());
    r.tags.insert(r.tags.end(), c.tags.begin(), c.tags.end());
    r.max_toa = std::max(r.max_toa, c.max_toa);
    c.hits.clear();
    c.tags.clear();
    c.parent = root;
    c.live = false;
    // splice child's absorbed chain, then the child itself
    if (c.child_head != kNoSlot) {
      if (r.child_head == kNoSlot) {
        r.child_head = c.child_head;
        r.child_tail = c.child_tail;
      } else {
        slots[r.child_tail].next_child = c.child_head;
        r.child_tail = c.child_tail;
      }
      c.child_head = c.child_tail = kNoSlot;
    }
    if (r.child_head == kNoSlot) {
      r.child_head = r.child_tail = child;
    } else {
      slots[r.child_tail].next_child = child;
      r.child_tail = child;
    }
    c.next_child = kNoSlot;
  }

  Cluster scratch;

  void emit(uint32_t root) {
    OpenCluster& r = slots[root];
    scratch.hits = std::move(r.hits);
    scratch.hit_tag = std::move(r.tags);
    build_cluster(scratch, params);
    // free the root and every absorbed slot
    uint32_t c = r.child_head;
    while (c != kNoSlot) {
      uint32_t next = slots[c].next_child;
      slots[c].gen++;
      slots[c].live = false;
      free_list.push_back(c);
      c = next;
    }
    r.child_head = r.child_tail = kNoSlot;
    r.gen++;
    r.live = false;
    free_list.push_back(root);
    sink(std::move(scratch));
    // hand the buffers back to the slot unless the sink kept them
    r.hits = std::move(scratch.hits);
    r.tags = std::move(scratch.hit_tag);
    r.hits.clear();
    r.tags.clear();
  }

  static void build_cluster(Cluster& c, const PipelineParams& p) {
    // canonical order: makes anchor tie-breaks independent of merge history
    size_t n = c.hits.size();
    auto pair_less = [&](const PixelHit& ha, uint32_t ta, const PixelHit& hb,
                         uint32_t tb) {
      if (!(ha == hb)) return hit_less(ha, hb);
      return ta < tb;
    };
    // in-place insertion sort; clusters are a couple dozen hits at most
    for (size_t i = 1; i < n; ++i) {
      PixelHit h = c.hits[i];
      uint32_t t = c.hit_tag[i];
      size_t j = i;
      while (j > 0 && pair_less(h, t, c.hits[j - 1], c.hit_tag[j - 1])) {
        c.hits[j] = c.hits[j - 1];
        c.hit_tag[j] = c.hit_tag[j - 1];
        --j;
      }
      c.hits[j] = h;
      c.hit_tag[j] = t;
    }

    double wsum = 0, csum = 0, rsum = 0;
    for (const PixelHit& h : c.hits) {
      double w = h.tot_ns;
      wsum += w;
      csum += w * h.col;
      rsum += w * h.row;
    }
    if (wsum > 0) {
      c.centroid_col = csum / wsum;
      c.centroid_row = rsum / wsum;
    } else {  // all-zero charge: fall back to unweighted mean
      double cs = 0, rs = 0;
      for (const PixelHit& h : c.hits) {
        cs += h.col;
        rs += h.row;
      }
      c.centroid_col = cs / n;
      c.centroid_row = rs / n;
    }

    int anchor = 0;
    if (p.anchor_mode == PipelineParams::AnchorMode::MaxTot) {
      for (size_t i = 1; i < n; ++i)
        if (c.hits[i].tot_ns > c.hits[anchor].tot_ns) anchor = static_cast<int>(i);
    } else {
      double best = 1e300;
      for (size_t i = 0; i < n; ++i) {
        double dc = c.hits[i].col - c.centroid_col;
        double dr = c.hits[i].row - c.centroid_row;
        double d2 = dc * dc + dr * dr;
        if (d2 < best) {
          best = d2;
          anchor = static_cast<int>(i);
        }
      }
    }
    c.anchor = anchor;
    c.raw_toa_ps = c.hits[anchor].toa_ps;
  }

  void finalize_ready(int64_t now_toa) {
    while (!fifo.empty()) {
      auto [slot, gen] = fifo.front();
      OpenCluster& oc = slots[slot];
      if (oc.gen != gen || oc.parent != slot) {  // freed, reused, or merged
        fifo.pop_front();
        continue;
      }
      if (now_toa - oc.max_toa > window_ps) {
        fifo.pop_front();
        emit(slot);
        continue;
      }
      break;
    }
  }

  void push(const PixelHit& hit, uint32_t tag) {
    finalize_ready(hit.toa_ps);
    uint32_t root = kNoSlot;
    for (int dr = -1; dr <= 1; ++dr) {
      int r = hit.row + dr;
      if (r < 0 || r > 255) continue;
      for (int dc = -1; dc <= 1; ++dc) {
        int c = hit.col + dc;
        if (c < 0 || c > 255) continue;
        size_t px = static_cast<size_t>(r) * kGridSize + c;
        if (hit.toa_ps - last_toa[px] > window_ps) continue;
        // A passing time test implies the owning cluster is still open.
        uint32_t cand = find(last_slot[px]);
        if (root == kNoSlot) {
          root = cand;
        } else if (cand != root) {
          absorb(root, cand);
        }
      }
    }
    if (root == kNoSlot) {
      root = alloc();
      slots[root].max_toa = hit.toa_ps;
      fifo.emplace_back(root, slots[root].gen);
    }
    OpenCluster& oc = slots[root];
    oc.hits.push_back(hit);
    oc.tags.push_back(tag);
    oc.max_toa = std::max(oc.max_toa, hit.toa_ps);
    size_t px = static_cast<size_t>(hit.row) * kGridSize + hit.col;
    last_toa[px] = hit.toa_ps;
    last_slot[px] = root;
  }

  void flush() {
    while (!fifo.empty()) {
      auto [slot, gen] = fifo.front();
      fifo.pop_front();
      OpenCluster& oc = slots[slot];
      if (oc.gen != gen || oc.parent != slot) continue;
      emit(slot);
    }
  }
};

ClusterStream::ClusterStream(const PipelineParams& p,
                             std::function<void(Cluster&&)> sink)
    : impl_(std::make_unique<Impl>(p, std::move(sink))) {
  p.validate();
}

ClusterStream::~ClusterStream() = default;

void ClusterStream::push(const PixelHit& hit, uint32_t tag) {
  impl_->push(hit, tag);
}

void ClusterStream::flush() { impl_->flush(); }

namespace {

bool cluster_less(const Cluster& a, const Cluster& b) {
  if (a.raw_toa_ps != b.raw_toa_ps) return a.raw_toa_ps < b.raw_toa_ps;
  if (!(a.hits[0] == b.hits[0])) return hit_less(a.hits[0], b.hits[0]);
  return a.hit_tag[0] < b.hit_tag[0];
}

// Chunk boundaries must fall on ToA gaps wider than the cluster window so
// chunked output equals the sequential partition.
std::vector<size_t> gap_splits(std::span<const PixelHit> hits, int64_t window_ps,
                               int nchunks) {
  std::vector<size_t> bounds{0};
  size_t target = hits.size() / nchunks;
  for (int c = 1; c < nchunks; ++c) {
    size_t want = std::max(bounds.back() + 1, c * target);
    size_t i = want;
    while (i < hits.size() && hits[i].toa_ps - hits[i - 1].toa_ps <= window_ps)
      ++i;
    if (i >= hits.size()) break;
    bounds.push_back(i);
  }
  bounds.push_back(hits.size());
  return bounds;
}

}  // namespace

std::vector<Cluster> cluster(std::span<const PixelHit> hits,
                             const PipelineParams& p, int nthreads) {
  std::vector<Cluster> out;
  int64_t window_ps = static_cast<int64_t>(std::llround(p.cluster_window_ns * 1e3));
  if (nthreads <= 1 || hits.size() < 4096) {
    ClusterStream cs(p, [&](Cluster&& c) { out.push_back(std::move(c)); });
    for (size_t i = 0; i < hits.size(); ++i)
      cs.push(hits[i], static_cast<uint32_t>(i));
    cs.flush();
  } else {
    std::vector<size_t> bounds = gap_splits(hits, window_ps, nthreads);
    size_t nchunks = bounds.size() - 1;
    std::vector<std::vector<Cluster>> parts(nchunks);
    std::vector<std::thread> workers;
    for (size_t c = 0; c < nchunks; ++c) {
      workers.emplace_back([&, c] {
        ClusterStream cs(p, [&parts, c](Cluster&& cl) {
          parts[c].push_back(std::move(cl));
        });
        for (size_t i = bounds[c]; i < bounds[c + 1]; ++i)
          cs.push(hits[i], static_cast<uint32_t>(i));
        cs.flush();
      });
    }
    for (auto& w : workers) w.join();
    for (auto& part : parts)
      for (auto& c : part) out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), cluster_less);
  return out;
}

TimewalkTable calibrate_timewalk(std::span<const Cluster> clusters,
                                 const PipelineParams& p) {
  p.validate();
  TimewalkTable table(p.tot_bins, p.tot_bin_lo_ns, p.tot_bin_hi_ns,
                      p.min_samples);
  size_t multi = 0;
  for (const Cluster& c : clusters) {
    if (c.size() < 2) continue;
    ++multi;
    const PixelHit& anchor = c.hits[c.anchor];
    for (size_t i = 0; i < c.hits.size(); ++i) {
      if (static_cast<int>(i) == c.anchor) continue;
      double delta_ns = (c.hits[i].toa_ps - anchor.toa_ps) * 1e-3;
      table.accumulate(c.hits[i].tot_ns, anchor.tot_ns, delta_ns);
    }
  }
  if (multi == 0)
    throw CalibrationError(
        "no multi-hit clusters: cannot calibrate time walk");
  table.finalize();
  return table;
}

PhotonEvent correct_one(const Cluster& c, const TimewalkTable& table,
                        const SpectrometerConfig& cfg) {
  double corr = table.correction_ns(c.hits[c.anchor].tot_ns,
                                    c.hits[c.anchor].tot_ns);
  PhotonEvent ev;
  ev.toa_ps = c.raw_toa_ps - static_cast<int64_t>(std::llround(corr * 1e3));
  // nearest pixel, ties toward the smaller index
  double cc = std::ceil(c.centroid_col - 0.5);
  double rr = std::ceil(c.centroid_row - 0.5);
  ev.col = static_cast<uint16_t>(std::clamp(cc, 0.0, 255.0));
  ev.row = static_cast<uint16_t>(std::clamp(rr, 0.0, 255.0));
  if (cfg.herald_rows.contains(ev.row))
    ev.arm = Arm::Herald;
  else if (cfg.signal_rows.contains(ev.row))
    ev.arm = Arm::Signal;
  else
    ev.arm = Arm::Unassigned;
  ev.cluster_size = static_cast<uint16_t>(std::min<size_t>(c.size(), UINT16_MAX));
  return ev;
}

std::vector<PhotonEvent> correct_and_centroid(std::span<const Cluster> clusters,
                                              const TimewalkTable& table,
                                              const SpectrometerConfig& cfg) {
  std::vector<PhotonEvent> out;
  out.reserve(clusters.size());
  for (const Cluster& c : clusters) out.push_back(correct_one(c, table, cfg));
  return out;
}

std::vector<PhotonEvent> process_hits(std::span<const PixelHit> hits,
                                      const TimewalkTable& table,
                                      const SpectrometerConfig& cfg,
                                      const PipelineParams& p, int nthreads) {
  std::vector<PhotonEvent> out;
  int64_t window_ps = static_cast<int64_t>(std::llround(p.cluster_window_ns * 1e3));
  if (nthreads <= 1 || hits.size() < 4096) {
    ClusterStream cs(p, [&](Cluster&& c) {
      out.push_back(correct_one(c, table, cfg));
    });
    for (size_t i = 0; i < hits.size(); ++i)
      cs.push(hits[i], static_cast<uint32_t>(i));
    cs.flush();
  } else {
    std::vector<size_t> bounds = gap_splits(hits, window_ps, nthreads);
    size_t nchunks = bounds.size() - 1;
    std::vector<std::vector<PhotonEvent>> parts(nchunks);
    std::vector<std::thread> workers;
    for (size_t c = 0; c < nchunks; ++c) {
      workers.emplace_back([&, c] {
        ClusterStream cs(p, [&parts, c, &table, &cfg](Cluster&& cl) {
          parts[c].push_back(correct_one(cl, table, cfg));
        });
        for (size_t i = bounds[c]; i < bounds[c + 1]; ++i)
          cs.push(hits[i], static_cast<uint32_t>(i));
        cs.flush();
      });
    }
    for (auto& w : workers) w.join();
    for (auto& part : parts)
      out.insert(out.end(), part.begin(), part.end());
  }
  std::sort(out.begin(), out.end(), event_less);
  return out;
}

}  // namespace stcf
