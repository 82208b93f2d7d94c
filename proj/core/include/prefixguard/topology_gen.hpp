#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "prefixguard/topology.hpp"

namespace prefixguard {

/// Knobs for the synthetic Internet-like topology generator.
///
/// The generator builds a fully meshed tier-1 clique, then attaches every
/// further AS to one or more earlier ASes as providers (preferential by
/// customer count, so the provider relation stays acyclic), then sprinkles
/// peer links between ASes of comparable size. Every AS can reach every
/// other over a valley-free path.
struct TopologyParams {
  std::size_t nodes = 1000;
  std::size_t tier1 = 12;
  /// Probability weights for an AS having 1, 2, 3, 4 providers.
  std::vector<double> provider_count_weights{0.45, 0.35, 0.15, 0.05};
  /// Expected number of peer links per transit AS (AS with customers).
  double transit_peering = 6.0;
  /// Expected number of peer links per stub AS.
  double stub_peering = 0.4;
  std::uint64_t seed = 1;
  /// ASNs are `first_asn + node index`.
  std::uint32_t first_asn = 1;
};

AsGraph generate_topology(const TopologyParams& params);

/// Picks `count` monitor ASes, biased toward well-connected ASes the way
/// route-collector peers are. Deterministic for a given seed.
std::vector<Asn> pick_monitors(const AsGraph& graph, std::size_t count, std::uint64_t seed);

/// Writes the graph in CAIDA serial-1 format.
void write_as_rel(const AsGraph& graph, std::ostream& out);

}  // namespace prefixguard
