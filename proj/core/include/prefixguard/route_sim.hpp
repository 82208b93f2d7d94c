#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "prefixguard/topology.hpp"
#include "prefixguard/types.hpp"

namespace prefixguard {

/// Where a selected route was learned, ordered by preference.
enum class RouteClass : std::uint8_t { None = 0, Provider = 1, Peer = 2, Customer = 3, Self = 4 };

std::string_view to_string(RouteClass c);

/// One or more origins injecting the same prefix. Each seed path is injected
/// at its leftmost AS and claims its rightmost AS as origin.
struct Announcement {
  Prefix prefix;
  std::vector<AsPath> seeds;
};

/// Selected route of a single AS for one prefix, stored compactly. The full
/// AS path is recovered by walking `next_hop` until a self-originated entry.
struct RouteEntry {
  RouteClass cls = RouteClass::None;
  /// Length of the selected path (for self routes, the seed length).
  std::uint16_t length = 0;
  /// Seed index (into PrefixRib::seeds) the route descends from.
  std::uint16_t seed = 0;
  NodeId next_hop = kNoNode;

  [[nodiscard]] bool has_route() const { return cls != RouteClass::None; }
};

/// ASes in `at` drop every route whose path contains `drop_paths_with`.
struct RouteFilter {
  std::vector<Asn> at;
  Asn drop_paths_with;
};

struct PropagationOptions {
  std::optional<RouteFilter> filter;
  /// Bound for the round-based engine; 0 means 4 * nodes + 16.
  std::size_t max_rounds = 0;
};

/// Per-prefix routing state of every AS in the graph.
struct PrefixRib {
  Prefix prefix;
  std::vector<AsPath> seeds;
  std::vector<RouteEntry> entries;  // by NodeId
};

/// Selected routes for every (AS, prefix) after propagation.
class RibState {
 public:
  RibState() = default;
  explicit RibState(const AsGraph* graph) : graph_(graph) {}

  [[nodiscard]] const AsGraph& graph() const { return *graph_; }
  [[nodiscard]] const std::map<Prefix, PrefixRib>& prefixes() const { return ribs_; }
  [[nodiscard]] const PrefixRib* find(const Prefix& prefix) const;
  PrefixRib& insert(PrefixRib rib);

  [[nodiscard]] bool has_route(Asn asn, const Prefix& prefix) const;
  [[nodiscard]] RouteClass learned_from(Asn asn, const Prefix& prefix) const;
  /// Selected AS path of `asn` for `prefix`, or nullopt without a route.
  [[nodiscard]] std::optional<AsPath> path(Asn asn, const Prefix& prefix) const;
  [[nodiscard]] std::optional<AsPath> path(NodeId node, const PrefixRib& rib) const;

  /// Per node: does the selected path for `rib` contain `target`?
  [[nodiscard]] std::vector<bool> traverses(const PrefixRib& rib, Asn target) const;

  /// ASes the route actually crossed: [owner, next hop, ..., injecting AS].
  /// Excludes the forged remainder of the seed path.
  [[nodiscard]] std::vector<Asn> traversal(NodeId node, const PrefixRib& rib) const;

 private:
  const AsGraph* graph_ = nullptr;
  std::map<Prefix, PrefixRib> ribs_;
};

/// Runs Gao-Rexford propagation of every announcement to its stable state.
///
/// Selection: customer > peer > provider, then shortest path, then lowest
/// next-hop ASN. Export: customer-learned and self routes go to everyone,
/// peer- and provider-learned routes to customers only. An AS never accepts a
/// path that already contains it. Announcements sharing a prefix compete.
///
/// The graph must outlive the returned RibState.
RibState propagate(const AsGraph& graph, std::span<const Announcement> announcements,
                   const PropagationOptions& options = {});

/// Same contract as propagate(), computed by synchronous rounds over explicit
/// paths until nothing changes. Used when the provider relation is cyclic and
/// as a cross-check. Throws SimulationError if the round bound is hit.
RibState propagate_rounds(const AsGraph& graph, std::span<const Announcement> announcements,
                          const PropagationOptions& options = {});

/// True if consecutive hops (traffic direction, from the route owner toward
/// the injecting AS) climb customer->provider links, cross at most one peer
/// link, then only descend provider->customer links. Non-adjacent hops fail.
bool is_valley_free(const AsGraph& graph, std::span<const Asn> hops);

}  // namespace prefixguard
