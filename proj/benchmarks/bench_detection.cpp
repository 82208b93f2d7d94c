#include <benchmark/benchmark.h>

#include "prefixguard/detection.hpp"
#include "prefixguard/feeds.hpp"

using namespace prefixguard;

namespace {

std::vector<BgpUpdate> synthetic(std::size_t n) {
  SyntheticFeedParams p;
  p.count = n;
  p.seed = 9;
  SyntheticSource src(p);
  std::vector<BgpUpdate> out;
  while (auto u = src.next()) out.push_back(std::move(*u));
  return out;
}

void BM_DetectionEngine(benchmark::State& state) {
  static const auto updates = synthetic(100'000);
  DetectionConfig cfg;
  cfg.owned.insert(parse_prefix("11.0.0.0/20"));
  for (auto _ : state) {
    std::size_t alerts = 0;
    DetectionEngine engine(cfg, {}, [&](const Alert&) { ++alerts; });
    for (const auto& u : updates) engine.process(u);
    engine.finish();
    benchmark::DoNotOptimize(alerts);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(updates.size()));
}
BENCHMARK(BM_DetectionEngine)->Unit(benchmark::kMillisecond);

void BM_RecordLineRoundTrip(benchmark::State& state) {
  static const auto updates = synthetic(10'000);
  for (auto _ : state) {
    for (const auto& u : updates) benchmark::DoNotOptimize(parse_record_line(to_record_line(u)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(updates.size()));
}
BENCHMARK(BM_RecordLineRoundTrip);

}  // namespace
