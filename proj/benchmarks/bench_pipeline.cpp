#include <benchmark/benchmark.h>

#include <vector>

#include "stcf/coincidence.hpp"
#include "stcf/event_io.hpp"
#include "stcf/pipeline.hpp"
#include "stcf/simulate.hpp"
#include "stcf/stats.hpp"

using namespace stcf;

namespace {

const SpectrometerConfig kCfg{};

// One shared dataset per binary run; generation dominates setup, not the
// measured loops.
const SimOutput& dataset() {
  static SimOutput sim = [] {
    SourceParams src;
    src.duration_s = 4;
    src.seed = 4242;
    IntensifierParams intf;
    return simulate_full(src, intf, kCfg);
  }();
  return sim;
}

std::vector<PhotonEvent> dataset_events() {
  PipelineParams p;
  return process_hits(dataset().hits, TimewalkTable::identity(p), kCfg, p);
}

void bm_clustering(benchmark::State& state) {
  const auto& hits = dataset().hits;
  PipelineParams p;
  for (auto _ : state) {
    std::vector<Cluster> out = cluster(hits, p);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * hits.size());
}
BENCHMARK(bm_clustering)->Unit(benchmark::kMillisecond);

void bm_fused_pipeline(benchmark::State& state) {
  const auto& hits = dataset().hits;
  PipelineParams p;
  TimewalkTable id = TimewalkTable::identity(p);
  for (auto _ : state) {
    std::vector<PhotonEvent> ev =
        process_hits(hits, id, kCfg, p, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(ev.data());
  }
  state.SetItemsProcessed(state.iterations() * hits.size());
}
BENCHMARK(bm_fused_pipeline)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void bm_matching(benchmark::State& state) {
  std::vector<PhotonEvent> events = dataset_events();
  std::vector<PhotonEvent> sig, her;
  for (const auto& e : events) {
    if (e.arm == Arm::Signal) sig.push_back(e);
    if (e.arm == Arm::Herald) her.push_back(e);
  }
  for (auto _ : state) {
    std::vector<Match> m = match_coincidences(sig, her);
    benchmark::DoNotOptimize(m.data());
  }
  state.SetItemsProcessed(state.iterations() * sig.size());
}
BENCHMARK(bm_matching)->Unit(benchmark::kMillisecond);

void bm_histogram(benchmark::State& state) {
  std::vector<PhotonEvent> events = dataset_events();
  std::vector<PhotonEvent> sig, her;
  for (const auto& e : events) {
    if (e.arm == Arm::Signal) sig.push_back(e);
    if (e.arm == Arm::Herald) her.push_back(e);
  }
  std::vector<Match> m = match_coincidences(sig, her);
  for (auto _ : state) {
    Histogram h = histogram_dt(m, kCfg);
    benchmark::DoNotOptimize(h.counts.data());
  }
  state.SetItemsProcessed(state.iterations() * m.size());
}
BENCHMARK(bm_histogram)->Unit(benchmark::kMillisecond);

void bm_encode(benchmark::State& state) {
  EventFile f;
  f.hits = dataset().hits;
  for (auto _ : state) {
    std::vector<uint8_t> bytes = encode_events(f);
    benchmark::DoNotOptimize(bytes.data());
  }
  state.SetItemsProcessed(state.iterations() * f.hits.size());
}
BENCHMARK(bm_encode)->Unit(benchmark::kMillisecond);

void bm_decode(benchmark::State& state) {
  EventFile f;
  f.hits = dataset().hits;
  std::vector<uint8_t> bytes = encode_events(f);
  for (auto _ : state) {
    EventFile back = decode_events(bytes);
    benchmark::DoNotOptimize(back.hits.data());
  }
  state.SetItemsProcessed(state.iterations() * f.hits.size());
}
BENCHMARK(bm_decode)->Unit(benchmark::kMillisecond);

void bm_poisson_tail(benchmark::State& state) {
  double acc = 0;
  for (auto _ : state) {
    for (int k = 0; k < 64; ++k) acc += poisson_tail(k, 21.43551488);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(bm_poisson_tail);

}  // namespace

BENCHMARK_MAIN();
