#include "prefixguard/hijack.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "prefixguard/errors.hpp"

namespace prefixguard {

namespace {

// Private-use 32-bit range; fillers are drawn from here and skip graph members.
constexpr std::uint32_t kFillerBase = 4200000000U;

std::uint64_t range_start(const Prefix& p) { return p.ipv4_address(); }
std::uint64_t range_end(const Prefix& p) { return range_start(p) + (std::uint64_t{1} << (32 - p.length())) - 1; }

std::vector<Asn> collect(const AsGraph& graph, const std::vector<bool>& mask) {
  std::vector<Asn> out;
  for (NodeId n = 0; n < mask.size(); ++n)
    if (mask[n]) out.push_back(graph.asn(n));
  std::sort(out.begin(), out.end());
  return out;
}

void compute_pollution(const AsGraph& graph, SimOutcome& out) {
  const Asn h = out.scenario.hijacker;
  const Asn v = out.scenario.victim;
  auto post = pollution_mask(out.rib, out.hijacked_prefix, h);
  std::vector<bool> polluted(graph.node_count(), false);
  std::vector<bool> pre(graph.node_count(), false);
  for (Asn a : out.pre_polluted) pre[graph.id(a)] = true;
  for (NodeId n = 0; n < post.size(); ++n) {
    Asn a = graph.asn(n);
    polluted[n] = post[n] && !pre[n] && a != h && a != v;
  }
  out.polluted = collect(graph, polluted);
  out.polluted_monitors.clear();
  for (NodeId m : graph.monitors())
    if (polluted[m]) out.polluted_monitors.push_back(graph.asn(m));
  std::sort(out.polluted_monitors.begin(), out.polluted_monitors.end());
}

std::vector<Announcement> all_announcements(const SimOutcome& o) {
  std::vector<Announcement> all = o.legitimate;
  all.insert(all.end(), o.attack.begin(), o.attack.end());
  all.insert(all.end(), o.mitigation.begin(), o.mitigation.end());
  return all;
}

}  // namespace

Prefix first_slash24(const Prefix& victim_prefix) {
  if (victim_prefix.family() != AddressFamily::IPv4) throw SimulationError("sub-prefix hijacks are simulated for IPv4 only");
  if (victim_prefix.length() >= 24) {
    throw SimulationError(fmt::format("cannot form a /24 sub-prefix of {}", victim_prefix.to_string()));
  }
  return Prefix::ipv4(victim_prefix.ipv4_address(), 24);
}

AsPath forge_hijack_path(const AsGraph& graph, const HijackScenario& s, const RibState& pre_rib) {
  const Asn h = s.hijacker;
  const Asn v = s.victim;
  const PathDim dim = s.hijack.path_dim;

  if (dim.unaltered) {
    if (s.hijack.prefix_dim == PrefixDim::ExactPrefix) {
      throw SimulationError("Type-U on the exact prefix is not a hijack");
    }
    auto own = pre_rib.path(h, s.victim_prefix);
    if (!own) throw SimulationError(fmt::format("AS{} has no route to replay unaltered", h.value));
    return own->prepended(h);
  }
  if (dim.n == 0) return AsPath({h});
  if (dim.n == 1) {
    if (s.fillers == FillerMode::RealPath) {
      NodeId hn = graph.id(h);
      if (graph.neighbor_kind(hn, graph.id(v)) != NeighborKind::None) {
        throw SimulationError(fmt::format("AS{} is a real neighbor of AS{}; a Type-1 claim would be genuine", h.value, v.value));
      }
    }
    return AsPath({h, v});
  }

  if (s.fillers == FillerMode::Synthetic) {
    std::vector<Asn> hops{h};
    std::uint32_t next = kFillerBase;
    while (hops.size() < dim.n) {
      Asn f(next++);
      if (graph.contains(f) || f == v || f == h) continue;
      hops.push_back(f);
    }
    hops.push_back(v);
    return AsPath(std::move(hops));
  }

  // RealPath: reuse the tail of some real route so only (h -> f1) is fake.
  const PrefixRib* rib = pre_rib.find(s.victim_prefix);
  if (!rib) throw SimulationError("no pre-hijack routes to borrow a real path suffix from");
  const NodeId hn = graph.id(h);
  std::vector<NodeId> ids(graph.node_count());
  for (NodeId i = 0; i < ids.size(); ++i) ids[i] = i;
  std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) { return graph.asn(a) < graph.asn(b); });
  for (NodeId a : ids) {
    if (a == hn || !rib->entries[a].has_route()) continue;
    auto path = pre_rib.path(a, *rib);
    AsPath full = rib->entries[a].cls == RouteClass::Self ? *path : path->prepended(graph.asn(a));
    if (full.size() < dim.n) continue;
    auto hops = full.hops();
    std::vector<Asn> tail(hops.end() - dim.n, hops.end());
    if (std::find(tail.begin(), tail.end(), h) != tail.end()) continue;
    auto f1 = graph.find(tail.front());
    if (!f1 || graph.neighbor_kind(hn, *f1) != NeighborKind::None) continue;
    tail.insert(tail.begin(), h);
    return AsPath(std::move(tail));
  }
  throw SimulationError(fmt::format("no real path of length {} toward AS{} can be forged by AS{}", dim.n, v.value, h.value));
}

std::vector<bool> pollution_mask(const RibState& rib, const Prefix& target, Asn hijacker) {
  const AsGraph& graph = rib.graph();
  if (target.family() != AddressFamily::IPv4) throw SimulationError("pollution is evaluated for IPv4 prefixes only");

  std::vector<const PrefixRib*> relevant;
  for (const auto& [p, r] : rib.prefixes())
    if (p.overlaps(target)) relevant.push_back(&r);
  // Most specific first, so the first route a node holds is its longest match.
  std::sort(relevant.begin(), relevant.end(),
            [](const PrefixRib* a, const PrefixRib* b) { return a->prefix.length() > b->prefix.length(); });

  std::vector<std::uint64_t> probes{range_start(target)};
  for (const PrefixRib* r : relevant) {
    if (r->prefix.length() <= target.length()) continue;
    probes.push_back(range_start(r->prefix));
    if (range_end(r->prefix) < range_end(target)) probes.push_back(range_end(r->prefix) + 1);
  }
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  std::vector<std::vector<bool>> traverses;
  traverses.reserve(relevant.size());
  for (const PrefixRib* r : relevant) traverses.push_back(rib.traverses(*r, hijacker));

  std::vector<bool> mask(graph.node_count(), false);
  std::vector<std::size_t> covering;
  for (std::uint64_t x : probes) {
    Prefix host = Prefix::ipv4(static_cast<std::uint32_t>(x), 32);
    covering.clear();
    for (std::size_t i = 0; i < relevant.size(); ++i)
      if (relevant[i]->prefix.contains(host)) covering.push_back(i);
    for (NodeId n = 0; n < graph.node_count(); ++n) {
      if (mask[n]) continue;
      for (std::size_t i : covering) {
        if (!relevant[i]->entries[n].has_route()) continue;
        if (traverses[i][n]) mask[n] = true;
        break;
      }
    }
  }
  return mask;
}

SimOutcome simulate_hijack(const AsGraph& graph, const HijackScenario& scenario) {
  if (scenario.victim == scenario.hijacker) throw SimulationError("victim and hijacker must differ");
  (void)graph.id(scenario.victim);
  (void)graph.id(scenario.hijacker);
  if (scenario.victim_prefix.family() != AddressFamily::IPv4) throw SimulationError("the simulator models IPv4 prefixes");

  SimOutcome out;
  out.scenario = scenario;
  out.scenario.hijack.data_plane_dim = scenario.hijack.data_plane_dim;
  out.node_count = graph.node_count();
  switch (scenario.hijack.prefix_dim) {
    case PrefixDim::ExactPrefix:
    case PrefixDim::Squatting:
      out.hijacked_prefix = scenario.victim_prefix;
      break;
    case PrefixDim::SubPrefix:
      out.hijacked_prefix = first_slash24(scenario.victim_prefix);
      break;
  }
  if (scenario.hijack.prefix_dim != PrefixDim::Squatting) {
    out.legitimate.push_back(Announcement{scenario.victim_prefix, {AsPath({scenario.victim})}});
  }
  out.pre_rib = propagate(graph, out.legitimate);
  out.pre_polluted = collect(graph, pollution_mask(out.pre_rib, out.hijacked_prefix, scenario.hijacker));
  std::erase(out.pre_polluted, scenario.hijacker);

  out.hijack_path = forge_hijack_path(graph, scenario, out.pre_rib);
  out.attack.push_back(Announcement{out.hijacked_prefix, {*out.hijack_path}});
  out.rib = propagate(graph, all_announcements(out));
  compute_pollution(graph, out);
  return out;
}

double impact(const SimOutcome& outcome) {
  auto denom = static_cast<double>(outcome.node_count) - static_cast<double>(outcome.pre_polluted.size()) - 2.0;
  if (denom <= 0) return 0.0;
  return static_cast<double>(outcome.polluted.size()) / denom;
}

Visibility visibility(const SimOutcome& outcome) {
  return {outcome.polluted_monitors.size(), outcome.polluted_monitors.empty()};
}

SimOutcome simulate_mitigation(const AsGraph& graph, const SimOutcome& outcome, const MitigationStrategy& strategy) {
  SimOutcome out = outcome;
  const Asn h = outcome.scenario.hijacker;
  switch (strategy.kind) {
    case MitigationStrategy::Kind::Deaggregation: {
      const Prefix& p = outcome.scenario.victim_prefix;
      if (p.length() >= 24) {
        throw SimulationError(fmt::format("deaggregating {} would produce prefixes longer than /24", p.to_string()));
      }
      for (bool upper : {false, true})
        out.mitigation.push_back(Announcement{p.half(upper), {AsPath({outcome.scenario.victim})}});
      break;
    }
    case MitigationStrategy::Kind::Moas: {
      if (strategy.ases.empty()) throw SimulationError("MOAS mitigation needs at least one mitigator");
      std::set<Asn> unique(strategy.ases.begin(), strategy.ases.end());
      Announcement a{outcome.hijacked_prefix, {}};
      for (Asn m : unique) {
        if (m == h) continue;
        (void)graph.id(m);
        a.seeds.push_back(AsPath({m}));
      }
      if (!a.seeds.empty()) out.mitigation.push_back(std::move(a));
      break;
    }
    case MitigationStrategy::Kind::Filtering:
      out.filter = RouteFilter{strategy.ases, h};
      break;
  }
  PropagationOptions options;
  options.filter = out.filter;
  out.rib = propagate(graph, all_announcements(out), options);
  compute_pollution(graph, out);
  return out;
}

}  // namespace prefixguard
