#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "prefixguard/route_sim.hpp"

namespace prefixguard {

/// How the intermediate ASes of a forged Type-N path are chosen.
enum class FillerMode : std::uint8_t {
  /// Fresh ASNs absent from the graph; only path length and endpoints matter.
  Synthetic,
  /// The last N ASes of a real pre-hijack path toward the victim, so that every
  /// link right of the fake one exists (what a detector actually sees).
  RealPath,
};

struct HijackScenario {
  Asn victim;
  Asn hijacker;
  HijackClass hijack;
  Prefix victim_prefix;
  FillerMode fillers = FillerMode::Synthetic;
};

/// Result of one hijack (or mitigation) simulation.
struct SimOutcome {
  HijackScenario scenario;
  /// Prefix announced by the hijacker.
  Prefix hijacked_prefix;
  /// Forged seed path the hijacker injected.
  std::optional<AsPath> hijack_path;
  std::vector<Announcement> legitimate;
  std::vector<Announcement> attack;
  std::vector<Announcement> mitigation;
  std::optional<RouteFilter> filter;
  RibState pre_rib;
  RibState rib;
  std::vector<Asn> pre_polluted;
  /// Newly polluted ASes; never contains the victim, the hijacker, or pre-polluted ASes.
  std::vector<Asn> polluted;
  std::vector<Asn> polluted_monitors;
  std::size_t node_count = 0;
};

/// First /24 inside `victim_prefix` (IPv4). Throws SimulationError for /24 or longer.
Prefix first_slash24(const Prefix& victim_prefix);

/// Builds the hijacker's seed path for `scenario` given pre-hijack routing.
AsPath forge_hijack_path(const AsGraph& graph, const HijackScenario& scenario, const RibState& pre_rib);

/// Per-node pollution under longest-prefix match: true if, for any address of
/// `target`, the most specific route the node holds traverses `hijacker`.
std::vector<bool> pollution_mask(const RibState& rib, const Prefix& target, Asn hijacker);

SimOutcome simulate_hijack(const AsGraph& graph, const HijackScenario& scenario);

/// |polluted| / (|nodes| - |pre_polluted| - 2); victim and hijacker are excluded.
double impact(const SimOutcome& outcome);

struct Visibility {
  std::size_t polluted_monitors = 0;
  bool invisible = true;
};

Visibility visibility(const SimOutcome& outcome);

/// Victim-side counteraction applied on top of a hijack outcome.
struct MitigationStrategy {
  enum class Kind : std::uint8_t { Deaggregation, Moas, Filtering };
  Kind kind = Kind::Deaggregation;
  std::vector<Asn> ases;  // mitigators or filters

  static MitigationStrategy deaggregation() { return {Kind::Deaggregation, {}}; }
  static MitigationStrategy moas(std::vector<Asn> mitigators) { return {Kind::Moas, std::move(mitigators)}; }
  static MitigationStrategy filtering(std::vector<Asn> filters) { return {Kind::Filtering, std::move(filters)}; }
};

/// Re-propagates with the mitigation in place and recomputes pollution.
/// Deaggregation: the victim also announces both halves of its prefix (error
/// when the prefix is /24 or longer). Moas: each mitigator originates the
/// hijacked prefix itself; ASes routed to a mitigator count as recovered.
/// Filtering: the listed ASes drop every route containing the hijacker.
SimOutcome simulate_mitigation(const AsGraph& graph, const SimOutcome& outcome, const MitigationStrategy& strategy);

}  // namespace prefixguard
