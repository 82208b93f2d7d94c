#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "prefixguard/topology.hpp"

namespace oracle {

/// Toy topology as raw edge lists. Node i has ASN i + 1.
struct ToyGraph {
  int n = 0;
  std::vector<std::pair<int, int>> c2p;  // (customer, provider)
  std::vector<std::pair<int, int>> p2p;

  [[nodiscard]] prefixguard::AsGraph build() const;
};

/// Random graph whose provider relation is acyclic (providers have lower index).
ToyGraph random_toy_graph(std::mt19937_64& rng, int max_nodes);

enum Class : int { kNone = 0, kProvider = 1, kPeer = 2, kCustomer = 3, kSelf = 4 };

struct Route {
  int cls = kNone;
  std::vector<std::uint32_t> path;  // as exported by the next hop; the seed for self routes
};

struct Result {
  std::vector<Route> routes;  // by node index
  bool converged = false;
  /// Every selected traversal appeared in the enumerated valley-free set.
  bool all_valley_free = false;
};

/// Brute force: enumerate every valley-free simple path toward each injecting
/// AS, then run asynchronous best-response in random node order until no AS
/// changes its choice. Seeds are injected at their first ASN (distinct per seed).
Result solve(const ToyGraph& g, const std::vector<std::vector<std::uint32_t>>& seeds,
             const std::optional<std::pair<std::vector<std::uint32_t>, std::uint32_t>>& filter, std::uint64_t order_seed);

}  // namespace oracle
