#include "prefixguard/route_sim.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "prefixguard/errors.hpp"

namespace prefixguard {

std::string_view to_string(RouteClass c) {
  switch (c) {
    case RouteClass::None: return "none";
    case RouteClass::Provider: return "provider";
    case RouteClass::Peer: return "peer";
    case RouteClass::Customer: return "customer";
    case RouteClass::Self: return "self";
  }
  return "?";
}

const PrefixRib* RibState::find(const Prefix& prefix) const {
  auto it = ribs_.find(prefix);
  return it == ribs_.end() ? nullptr : &it->second;
}

PrefixRib& RibState::insert(PrefixRib rib) {
  Prefix key = rib.prefix;
  return ribs_.insert_or_assign(key, std::move(rib)).first->second;
}

bool RibState::has_route(Asn asn, const Prefix& prefix) const {
  return learned_from(asn, prefix) != RouteClass::None;
}

RouteClass RibState::learned_from(Asn asn, const Prefix& prefix) const {
  const PrefixRib* rib = find(prefix);
  auto node = graph_->find(asn);
  if (!rib || !node) return RouteClass::None;
  return rib->entries[*node].cls;
}

std::optional<AsPath> RibState::path(Asn asn, const Prefix& prefix) const {
  const PrefixRib* rib = find(prefix);
  auto node = graph_->find(asn);
  if (!rib || !node) return std::nullopt;
  return path(*node, *rib);
}

std::optional<AsPath> RibState::path(NodeId node, const PrefixRib& rib) const {
  const RouteEntry* e = &rib.entries[node];
  if (!e->has_route()) return std::nullopt;
  if (e->cls == RouteClass::Self) return rib.seeds[e->seed];
  std::vector<Asn> hops;
  hops.reserve(e->length);
  for (std::size_t guard = 0; guard <= rib.entries.size(); ++guard) {
    NodeId next = e->next_hop;
    const RouteEntry& ne = rib.entries[next];
    if (ne.cls == RouteClass::Self) {
      auto seed = rib.seeds[ne.seed].hops();
      hops.insert(hops.end(), seed.begin(), seed.end());
      return AsPath(std::move(hops));
    }
    hops.push_back(graph_->asn(next));
    e = &ne;
  }
  throw SimulationError("next-hop chain does not terminate");
}

std::vector<Asn> RibState::traversal(NodeId node, const PrefixRib& rib) const {
  std::vector<Asn> out;
  if (!rib.entries[node].has_route()) return out;
  out.push_back(graph_->asn(node));
  NodeId cur = node;
  for (std::size_t guard = 0; rib.entries[cur].cls != RouteClass::Self; ++guard) {
    if (guard > rib.entries.size()) throw SimulationError("next-hop chain does not terminate");
    cur = rib.entries[cur].next_hop;
    out.push_back(graph_->asn(cur));
  }
  return out;
}

std::vector<bool> RibState::traverses(const PrefixRib& rib, Asn target) const {
  const std::size_t n = rib.entries.size();
  // full[x]: does the path *including* x (as exported by x) contain target?
  std::vector<std::int8_t> full(n, -1);
  std::vector<bool> seed_has(rib.seeds.size());
  for (std::size_t s = 0; s < rib.seeds.size(); ++s) seed_has[s] = rib.seeds[s].contains(target);
  const auto target_node = graph_->find(target);

  std::vector<NodeId> chain;
  auto resolve = [&](NodeId start) -> bool {
    chain.clear();
    NodeId x = start;
    bool value = false;
    while (true) {
      if (full[x] >= 0) {
        value = full[x] == 1;
        break;
      }
      const RouteEntry& e = rib.entries[x];
      if (e.cls == RouteClass::Self) {
        value = seed_has[e.seed];
        full[x] = value;
        break;
      }
      if (target_node && x == *target_node) {
        value = true;
        full[x] = 1;
        break;
      }
      chain.push_back(x);
      x = e.next_hop;
    }
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) full[*it] = value;
    return value;
  };

  std::vector<bool> out(n, false);
  for (NodeId a = 0; a < n; ++a) {
    const RouteEntry& e = rib.entries[a];
    if (!e.has_route()) continue;
    out[a] = e.cls == RouteClass::Self ? seed_has[e.seed] : resolve(e.next_hop);
  }
  return out;
}

namespace {

struct SeedInfo {
  NodeId injector;
  std::vector<NodeId> members;  // graph nodes on the seed path other than the injector
};

struct Contest {
  Prefix prefix;
  std::vector<AsPath> seeds;
};

std::vector<Contest> group_by_prefix(std::span<const Announcement> announcements) {
  std::map<Prefix, Contest> grouped;
  for (const auto& a : announcements) {
    if (a.seeds.empty()) throw SimulationError(fmt::format("announcement for {} has no origin", a.prefix.to_string()));
    auto& c = grouped[a.prefix];
    c.prefix = a.prefix;
    c.seeds.insert(c.seeds.end(), a.seeds.begin(), a.seeds.end());
  }
  std::vector<Contest> out;
  out.reserve(grouped.size());
  for (auto& [p, c] : grouped) out.push_back(std::move(c));
  return out;
}

std::vector<SeedInfo> index_seeds(const AsGraph& graph, const Contest& contest) {
  std::vector<SeedInfo> info;
  for (const auto& seed : contest.seeds) {
    if (path_has_loop(seed)) throw SimulationError("seed path " + seed.to_string() + " has a loop");
    if (seed.size() > 0xFFFF) throw SimulationError("seed path too long");
    SeedInfo s{graph.id(seed.first()), {}};
    for (std::size_t i = 1; i < seed.size(); ++i)
      if (auto n = graph.find(seed[i])) s.members.push_back(*n);
    info.push_back(std::move(s));
  }
  return info;
}

std::vector<bool> filter_mask(const AsGraph& graph, const PropagationOptions& options) {
  std::vector<bool> mask;
  if (!options.filter) return mask;
  mask.assign(graph.node_count(), false);
  for (Asn a : options.filter->at)
    if (auto n = graph.find(a)) mask[*n] = true;
  return mask;
}

/// Installs self routes; with several seeds at one AS the shortest (then first) wins.
void install_seeds(const Contest& contest, const std::vector<SeedInfo>& seeds, std::vector<RouteEntry>& entries) {
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    RouteEntry& e = entries[seeds[s].injector];
    auto len = static_cast<std::uint16_t>(contest.seeds[s].size());
    if (e.cls != RouteClass::Self || len < e.length) e = RouteEntry{RouteClass::Self, len, static_cast<std::uint16_t>(s), kNoNode};
  }
}

class PhasedPropagator {
 public:
  PhasedPropagator(const AsGraph& graph, const Contest& contest, const PropagationOptions& options,
                   const std::vector<NodeId>& order)
      : graph_(graph), contest_(contest), order_(order), seeds_(index_seeds(graph, contest)),
        filtering_(filter_mask(graph, options)), entries_(graph.node_count()),
        tainted_(graph.node_count(), false) {
    if (options.filter) {
      target_ = graph.find(options.filter->drop_paths_with);
      for (const auto& seed : contest.seeds) seed_tainted_.push_back(seed.contains(options.filter->drop_paths_with));
    }
  }

  std::vector<RouteEntry> run() {
    install_seeds(contest_, seeds_, entries_);
    for (NodeId n = 0; n < entries_.size(); ++n)
      if (entries_[n].cls == RouteClass::Self) finalize(n);

    // Customer routes climb the provider DAG.
    for (NodeId a : order_) {
      if (entries_[a].cls == RouteClass::Self) continue;
      for (NodeId c : graph_.customers(a)) {
        RouteClass cc = entries_[c].cls;
        if (cc == RouteClass::Self || cc == RouteClass::Customer) consider(a, c, RouteClass::Customer);
      }
      finalize(a);
    }
    // Peer routes: one lateral hop from customer or self routes.
    std::vector<RouteEntry> peer_routes(entries_.size());
    for (NodeId a = 0; a < entries_.size(); ++a) {
      if (entries_[a].has_route()) continue;
      for (NodeId p : graph_.peers(a)) {
        RouteClass pc = entries_[p].cls;
        if (pc == RouteClass::Self || pc == RouteClass::Customer) consider_into(peer_routes[a], a, p, RouteClass::Peer);
      }
    }
    for (NodeId a = 0; a < entries_.size(); ++a) {
      if (peer_routes[a].has_route()) {
        entries_[a] = peer_routes[a];
        finalize(a);
      }
    }
    // Provider routes descend, providers first.
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      NodeId a = *it;
      if (entries_[a].has_route()) continue;
      for (NodeId q : graph_.providers(a))
        if (entries_[q].has_route()) consider(a, q, RouteClass::Provider);
      if (entries_[a].has_route()) finalize(a);
    }
    return std::move(entries_);
  }

 private:
  [[nodiscard]] std::uint16_t exported_length(NodeId n) const {
    const RouteEntry& e = entries_[n];
    return e.cls == RouteClass::Self ? e.length : static_cast<std::uint16_t>(e.length + 1);
  }

  [[nodiscard]] bool acceptable(NodeId a, NodeId from) const {
    const auto& members = seeds_[entries_[from].seed].members;
    if (std::find(members.begin(), members.end(), a) != members.end()) return false;
    if (!filtering_.empty() && filtering_[a] && tainted_[from]) return false;
    return true;
  }

  void consider_into(RouteEntry& best, NodeId a, NodeId from, RouteClass cls) const {
    if (!acceptable(a, from)) return;
    std::uint16_t len = exported_length(from);
    bool better = !best.has_route() || cls > best.cls ||
                  (cls == best.cls && (len < best.length ||
                                       (len == best.length && graph_.asn(from) < graph_.asn(best.next_hop))));
    if (better) best = RouteEntry{cls, len, entries_[from].seed, from};
  }

  void consider(NodeId a, NodeId from, RouteClass cls) { consider_into(entries_[a], a, from, cls); }

  // Records whether the path as exported by `n` (n included) contains the filter target.
  void finalize(NodeId n) {
    if (seed_tainted_.empty()) return;
    const RouteEntry& e = entries_[n];
    if (e.cls == RouteClass::Self) {
      tainted_[n] = seed_tainted_[e.seed];
    } else if (e.has_route()) {
      tainted_[n] = (target_ && *target_ == n) || tainted_[e.next_hop];
    }
  }

  const AsGraph& graph_;
  const Contest& contest_;
  const std::vector<NodeId>& order_;
  std::vector<SeedInfo> seeds_;
  std::vector<bool> filtering_;
  std::vector<RouteEntry> entries_;
  std::vector<bool> tainted_;
  std::vector<bool> seed_tainted_;
  std::optional<NodeId> target_;
};

// Explicit-path synchronous rounds. Slow but needs no acyclicity assumption.
std::vector<RouteEntry> run_rounds(const AsGraph& graph, const Contest& contest, const PropagationOptions& options) {
  const std::size_t n = graph.node_count();
  const auto seeds = index_seeds(graph, contest);
  const auto filtering = filter_mask(graph, options);

  struct State {
    RouteClass cls = RouteClass::None;
    std::uint16_t seed = 0;
    NodeId next_hop = kNoNode;
    std::vector<Asn> path;  // selected path as seen by the owner

    bool operator==(const State&) const = default;
  };
  std::vector<RouteEntry> init(n);
  install_seeds(contest, seeds, init);
  std::vector<State> cur(n);
  for (NodeId a = 0; a < n; ++a) {
    if (init[a].cls != RouteClass::Self) continue;
    auto hops = contest.seeds[init[a].seed].hops();
    cur[a] = State{RouteClass::Self, init[a].seed, kNoNode, {hops.begin(), hops.end()}};
  }

  auto exported = [&](NodeId from) {
    const State& s = cur[from];
    if (s.cls == RouteClass::Self) return s.path;
    std::vector<Asn> out;
    out.reserve(s.path.size() + 1);
    out.push_back(graph.asn(from));
    out.insert(out.end(), s.path.begin(), s.path.end());
    return out;
  };

  const std::size_t bound = options.max_rounds ? options.max_rounds : 4 * n + 16;
  for (std::size_t round = 0; round < bound; ++round) {
    std::vector<State> next = cur;
    bool changed = false;
    for (NodeId a = 0; a < n; ++a) {
      if (cur[a].cls == RouteClass::Self) continue;
      State best;
      auto offer = [&](NodeId from, RouteClass cls) {
        const State& s = cur[from];
        if (s.cls == RouteClass::None) return;
        bool exports = s.cls == RouteClass::Self || s.cls == RouteClass::Customer || cls == RouteClass::Provider;
        if (!exports) return;
        std::vector<Asn> path = exported(from);
        if (std::find(path.begin(), path.end(), graph.asn(a)) != path.end()) return;
        if (!filtering.empty() && filtering[a] &&
            std::find(path.begin(), path.end(), options.filter->drop_paths_with) != path.end()) {
          return;
        }
        bool better = best.cls == RouteClass::None || cls > best.cls ||
                      (cls == best.cls && (path.size() < best.path.size() ||
                                           (path.size() == best.path.size() && graph.asn(from) < graph.asn(best.next_hop))));
        if (better) best = State{cls, s.seed, from, std::move(path)};
      };
      for (NodeId c : graph.customers(a)) offer(c, RouteClass::Customer);
      for (NodeId p : graph.peers(a)) offer(p, RouteClass::Peer);
      for (NodeId q : graph.providers(a)) offer(q, RouteClass::Provider);
      if (!(best == cur[a])) {
        next[a] = std::move(best);
        changed = true;
      }
    }
    cur = std::move(next);
    if (!changed) {
      std::vector<RouteEntry> out(n);
      for (NodeId a = 0; a < n; ++a) {
        out[a] = RouteEntry{cur[a].cls, static_cast<std::uint16_t>(cur[a].path.size()), cur[a].seed, cur[a].next_hop};
      }
      return out;
    }
  }
  throw SimulationError(fmt::format("propagation of {} did not converge within {} rounds", contest.prefix.to_string(), bound));
}

}  // namespace

RibState propagate(const AsGraph& graph, std::span<const Announcement> announcements, const PropagationOptions& options) {
  const auto& order = graph.customer_first_order();
  if (!order) return propagate_rounds(graph, announcements, options);
  RibState state(&graph);
  for (auto& contest : group_by_prefix(announcements)) {
    PhasedPropagator engine(graph, contest, options, *order);
    state.insert(PrefixRib{contest.prefix, contest.seeds, engine.run()});
  }
  return state;
}

RibState propagate_rounds(const AsGraph& graph, std::span<const Announcement> announcements,
                          const PropagationOptions& options) {
  RibState state(&graph);
  for (auto& contest : group_by_prefix(announcements)) {
    auto entries = run_rounds(graph, contest, options);
    state.insert(PrefixRib{contest.prefix, contest.seeds, std::move(entries)});
  }
  return state;
}

bool is_valley_free(const AsGraph& graph, std::span<const Asn> hops) {
  // Phase 0: climbing, 1: after the peer hop or first descent.
  int phase = 0;
  for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
    auto a = graph.find(hops[i]);
    auto b = graph.find(hops[i + 1]);
    if (!a || !b) return false;
    switch (graph.neighbor_kind(*a, *b)) {
      case NeighborKind::Provider:
        if (phase != 0) return false;
        break;
      case NeighborKind::Peer:
        if (phase != 0) return false;
        phase = 1;
        break;
      case NeighborKind::Customer:
        phase = 1;
        break;
      case NeighborKind::None:
        return false;
    }
  }
  return true;
}

}  // namespace prefixguard
