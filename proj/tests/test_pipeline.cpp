#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "stcf/pipeline.hpp"
#include "stcf/rng.hpp"
#include "stcf/simulate.hpp"

using namespace stcf;

namespace {

const SpectrometerConfig kCfg{};

// Reference clustering: union-find over every hit pair with Chebyshev
// distance <= 1 and ToA gap <= window. Quadratic, so only for small inputs.
std::vector<std::set<uint32_t>> brute_clusters(
    const std::vector<PixelHit>& hits, double window_ns) {
  int64_t window_ps = static_cast<int64_t>(std::llround(window_ns * 1e3));
  size_t n = hits.size();
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  std::function<size_t(size_t)> find = [&](size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      int dc = std::abs(int(hits[i].col) - int(hits[j].col));
      int dr = std::abs(int(hits[i].row) - int(hits[j].row));
      int64_t dt = std::abs(hits[i].toa_ps - hits[j].toa_ps);
      if (std::max(dc, dr) <= 1 && dt <= window_ps)
        parent[find(i)] = find(j);
    }
  std::vector<std::set<uint32_t>> groups(n);
  for (size_t i = 0; i < n; ++i)
    groups[find(i)].insert(static_cast<uint32_t>(i));
  std::vector<std::set<uint32_t>> out;
  for (auto& g : groups)
    if (!g.empty()) out.push_back(std::move(g));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::set<uint32_t>> tags_of(const std::vector<Cluster>& clusters) {
  std::vector<std::set<uint32_t>> out;
  for (const Cluster& c : clusters)
    out.emplace_back(c.hit_tag.begin(), c.hit_tag.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Dense random bursts on a small grid, deliberately stressing merges,
// same-pixel refires, and exact ToA ties.
std::vector<PixelHit> random_burst_hits(uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<PixelHit> hits;
  int64_t t = 0;
  while (static_cast<int>(hits.size()) < n) {
    t += static_cast<int64_t>(rng.exponential(1.0 / 150e3));  // ~150 us gaps
    int burst = 1 + static_cast<int>(rng.uniform(0, 6));
    int col = static_cast<int>(rng.uniform(2, 14));
    int row = static_cast<int>(rng.uniform(2, 14));
    int64_t bt = t;
    for (int k = 0; k < burst && static_cast<int>(hits.size()) < n; ++k) {
      bt += static_cast<int64_t>(rng.uniform(0, 120e3));  // up to 120 ns
      int dc = static_cast<int>(rng.uniform(0, 3)) - 1;
      int dr = static_cast<int>(rng.uniform(0, 3)) - 1;
      hits.push_back({static_cast<uint16_t>(col + dc),
                      static_cast<uint16_t>(row + dr), bt,
                      static_cast<uint16_t>(25 + rng.uniform(0, 500))});
    }
  }
  std::sort(hits.begin(), hits.end(), hit_less);
  return hits;
}

}  // namespace

TEST_CASE("streaming clusterer equals the pairwise reference") {
  PipelineParams p;
  for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    std::vector<PixelHit> hits = random_burst_hits(seed, 600);
    std::vector<Cluster> got = cluster(hits, p);
    CHECK(tags_of(got) == brute_clusters(hits, p.cluster_window_ns));
  }
}

TEST_CASE("threaded clustering is identical to sequential") {
  SourceParams src;
  src.duration_s = 1;
  src.seed = 21;
  IntensifierParams intf;
  SimOutput sim = simulate_full(src, intf, kCfg);
  PipelineParams p;

  std::vector<Cluster> seq = cluster(sim.hits, p, 1);
  for (int nthreads : {2, 4}) {
    std::vector<Cluster> par = cluster(sim.hits, p, nthreads);
    REQUIRE(par.size() == seq.size());
    for (size_t i = 0; i < seq.size(); ++i) {
      CHECK(par[i].hits == seq[i].hits);
      CHECK(par[i].hit_tag == seq[i].hit_tag);
      CHECK(par[i].anchor == seq[i].anchor);
    }
  }
}

TEST_CASE("cluster invariants on simulated data") {
  SourceParams src;
  src.duration_s = 0.5;
  src.seed = 23;
  IntensifierParams intf;
  SimOutput sim = simulate_full(src, intf, kCfg);
  PipelineParams p;
  std::vector<Cluster> clusters = cluster(sim.hits, p);

  size_t total = 0;
  int64_t prev_toa = INT64_MIN;
  for (const Cluster& c : clusters) {
    total += c.size();
    REQUIRE(!c.hits.empty());
    CHECK(c.raw_toa_ps >= prev_toa);
    prev_toa = c.raw_toa_ps;
    // anchor is the max-ToT hit under the default policy
    for (const PixelHit& h : c.hits) CHECK(h.tot_ns <= c.anchor_tot());
    // centroid lies inside the cluster's bounding box
    auto [cmin, cmax] = std::minmax_element(
        c.hits.begin(), c.hits.end(),
        [](const PixelHit& a, const PixelHit& b) { return a.col < b.col; });
    CHECK(c.centroid_col >= cmin->col);
    CHECK(c.centroid_col <= cmax->col);
  }
  CHECK(total == sim.hits.size());
}

TEST_CASE("timewalk table accumulates exact cell statistics") {
  PipelineParams p;
  p.min_samples = 5;
  TimewalkTable t(p.tot_bins, p.tot_bin_lo_ns, p.tot_bin_hi_ns, p.min_samples);

  int bin_small = t.bin_of(30.0);
  int bin_large = t.bin_of(1500.0);
  REQUIRE(bin_small != bin_large);

  for (int i = 0; i < 8; ++i) t.accumulate(30.0, 1500.0, 3.6);
  t.finalize();

  CHECK(t.reference_bin() == bin_large);
  CHECK(t.cell_count(bin_small, bin_large) == 8);
  CHECK(t.cell_mean_ns(bin_small, bin_large) == doctest::Approx(3.6));
  CHECK(t.cell_sem_ns(bin_small, bin_large) == doctest::Approx(0.0));
  // relative offset plus the anchor's own absolute walk (no self samples: 0)
  CHECK(t.correction_ns(30.0, 1500.0) == doctest::Approx(3.6));
  CHECK(t.correction_ns(1500.0, 1500.0) == doctest::Approx(0.0));
  // under-sampled cells apply no correction
  TimewalkTable sparse(p.tot_bins, p.tot_bin_lo_ns, p.tot_bin_hi_ns, 50);
  for (int i = 0; i < 8; ++i) sparse.accumulate(30.0, 1500.0, 3.6);
  sparse.finalize();
  CHECK(sparse.correction_ns(30.0, 1500.0) == doctest::Approx(0.0));
}

TEST_CASE("timewalk tables merge and serialize losslessly") {
  PipelineParams p;
  Rng rng(31);
  TimewalkTable whole(p.tot_bins, p.tot_bin_lo_ns, p.tot_bin_hi_ns, 3);
  TimewalkTable part1(p.tot_bins, p.tot_bin_lo_ns, p.tot_bin_hi_ns, 3);
  TimewalkTable part2(p.tot_bins, p.tot_bin_lo_ns, p.tot_bin_hi_ns, 3);
  for (int i = 0; i < 500; ++i) {
    double tp = 25 * std::exp(rng.uniform(0, 4.2));
    double ta = 25 * std::exp(rng.uniform(0, 4.38));
    double d = rng.gaussian();
    whole.accumulate(tp, ta, d);
    (i % 2 ? part1 : part2).accumulate(tp, ta, d);
  }
  part1.merge(part2);
  part1.finalize();
  whole.finalize();
  for (int a = 0; a < p.tot_bins; ++a)
    for (int b = 0; b < p.tot_bins; ++b) {
      CHECK(part1.cell_count(a, b) == whole.cell_count(a, b));
      CHECK(part1.cell_mean_ns(a, b) ==
            doctest::Approx(whole.cell_mean_ns(a, b)).epsilon(1e-12));
    }

  TimewalkTable back = TimewalkTable::from_json_string(whole.to_json_string());
  CHECK(back.reference_bin() == whole.reference_bin());
  for (int a = 0; a < p.tot_bins; ++a) {
    CHECK(back.absolute_walk_ns(a) ==
          doctest::Approx(whole.absolute_walk_ns(a)).epsilon(1e-12));
    for (int b = 0; b < p.tot_bins; ++b)
      CHECK(back.cell_count(a, b) == whole.cell_count(a, b));
  }
}

TEST_CASE("calibration needs multi-hit clusters") {
  SourceParams src;
  src.duration_s = 0.1;
  src.seed = 33;
  SimOutput sim = simulate_ideal_full(src, kCfg);  // single-hit clusters only
  PipelineParams p;
  std::vector<Cluster> clusters = cluster(sim.hits, p);
  CHECK_THROWS_AS(calibrate_timewalk(clusters, p), CalibrationError);
}

TEST_CASE("calibrated corrections recover the injected walk law") {
  SourceParams src;
  src.duration_s = 2;
  src.seed = 35;
  IntensifierParams intf;
  SimOutput sim = simulate_full(src, intf, kCfg);
  PipelineParams p;
  std::vector<Cluster> clusters = cluster(sim.hits, p);
  TimewalkTable table = calibrate_timewalk(clusters, p);

  // Well-sampled relative cells must sit near the true walk difference at
  // the bin centers. Bin-center curvature and jitter leave residuals well
  // under 0.5 ns at these statistics; the acceptance suite tightens this.
  int checked = 0;
  for (int bp = 0; bp < table.bins(); ++bp)
    for (int ba = 0; ba < table.bins(); ++ba) {
      if (table.cell_count(bp, ba) < 400) continue;
      double truth = intf.timewalk_ns(table.bin_center_ns(bp)) -
                     intf.timewalk_ns(table.bin_center_ns(ba));
      CHECK(std::abs(table.cell_mean_ns(bp, ba) - truth) < 0.5);
      checked++;
    }
  CHECK(checked > 10);
}

TEST_CASE("centroiding rounds to the nearest pixel, ties toward zero") {
  PipelineParams p;
  TimewalkTable id = TimewalkTable::identity(p);

  Cluster c;
  c.hits = {{10, 170, 1000, 100}, {11, 170, 1100, 100}};
  c.hit_tag = {0, 1};
  c.centroid_col = 10.5;  // exact tie
  c.centroid_row = 170.0;
  c.anchor = 0;
  c.raw_toa_ps = 1000;
  PhotonEvent ev = correct_one(c, id, kCfg);
  CHECK(ev.col == 10);
  CHECK(ev.row == 170);
  CHECK(ev.arm == Arm::Signal);
  CHECK(ev.cluster_size == 2);
  CHECK(ev.toa_ps == 1000);

  c.centroid_col = 10.51;
  CHECK(correct_one(c, id, kCfg).col == 11);
  c.centroid_row = 80.0;
  CHECK(correct_one(c, id, kCfg).arm == Arm::Herald);
  c.centroid_row = 130.0;
  CHECK(correct_one(c, id, kCfg).arm == Arm::Unassigned);
}

TEST_CASE("fused pipeline equals cluster then correct then sort") {
  SourceParams src;
  src.duration_s = 1;
  src.seed = 37;
  IntensifierParams intf;
  SimOutput sim = simulate_full(src, intf, kCfg);
  PipelineParams p;

  std::vector<Cluster> clusters = cluster(sim.hits, p);
  TimewalkTable table = calibrate_timewalk(clusters, p);

  std::vector<PhotonEvent> composed = correct_and_centroid(clusters, table, kCfg);
  std::sort(composed.begin(), composed.end(), event_less);

  for (int nthreads : {1, 4}) {
    std::vector<PhotonEvent> fused =
        process_hits(sim.hits, table, kCfg, p, nthreads);
    REQUIRE(fused.size() == composed.size());
    for (size_t i = 0; i < fused.size(); ++i) {
      CHECK(fused[i].toa_ps == composed[i].toa_ps);
      CHECK(fused[i].col == composed[i].col);
      CHECK(fused[i].row == composed[i].row);
      CHECK(fused[i].arm == composed[i].arm);
    }
  }
}

TEST_CASE("pipeline parameter validation") {
  PipelineParams p;
  p.cluster_window_ns = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = PipelineParams{};
  p.tot_bins = 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = PipelineParams{};
  p.tot_bin_lo_ns = 500;
  p.tot_bin_hi_ns = 100;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
