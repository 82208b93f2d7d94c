#include <map>

#include <benchmark/benchmark.h>

#include "prefixguard/experiment.hpp"
#include "prefixguard/hijack.hpp"
#include "prefixguard/route_sim.hpp"
#include "prefixguard/topology_gen.hpp"

using namespace prefixguard;

namespace {

const AsGraph& graph_of(std::size_t nodes) {
  static std::map<std::size_t, AsGraph> cache;
  auto it = cache.find(nodes);
  if (it == cache.end()) {
    TopologyParams p;
    p.nodes = nodes;
    p.seed = 1;
    it = cache.emplace(nodes, generate_topology(p)).first;
  }
  return it->second;
}

const Prefix kPrefix = Prefix::ipv4(0x0A000000U, 23);

void BM_PropagateSingleOrigin(benchmark::State& state) {
  const AsGraph& g = graph_of(static_cast<std::size_t>(state.range(0)));
  std::vector<Announcement> ann{{kPrefix, {AsPath{g.asn(NodeId(g.node_count() / 2)).value}}}};
  for (auto _ : state) benchmark::DoNotOptimize(propagate(g, ann));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.node_count()));
}
BENCHMARK(BM_PropagateSingleOrigin)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_PropagateRounds(benchmark::State& state) {
  const AsGraph& g = graph_of(static_cast<std::size_t>(state.range(0)));
  std::vector<Announcement> ann{{kPrefix, {AsPath{g.asn(NodeId(g.node_count() / 2)).value}}}};
  for (auto _ : state) benchmark::DoNotOptimize(propagate_rounds(g, ann));
}
BENCHMARK(BM_PropagateRounds)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_HijackType(benchmark::State& state) {
  const AsGraph& g = graph_of(10000);
  auto pairs = draw_pairs(g, 64, 3);
  auto type = static_cast<std::uint8_t>(state.range(0));
  std::size_t i = 0;
  for (auto _ : state) {
    auto [v, h] = pairs[i++ % pairs.size()];
    HijackScenario s{v, h, {PrefixDim::ExactPrefix, PathDim::type(type), DataPlaneDim::Unknown}, kPrefix};
    benchmark::DoNotOptimize(simulate_hijack(g, s));
  }
}
BENCHMARK(BM_HijackType)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

}  // namespace
