#include "prefixguard/topology_gen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>

#include "prefixguard/errors.hpp"

namespace prefixguard {

AsGraph generate_topology(const TopologyParams& params) {
  if (params.tier1 < 1 || params.nodes < params.tier1) {
    throw SimulationError("topology generator needs 1 <= tier1 <= nodes");
  }
  std::mt19937_64 rng(params.seed);
  AsGraph graph;
  auto asn_of = [&](std::size_t i) { return Asn(params.first_asn + static_cast<std::uint32_t>(i)); };
  for (std::size_t i = 0; i < params.nodes; ++i) graph.add_node(asn_of(i));

  for (std::size_t a = 0; a < params.tier1; ++a)
    for (std::size_t b = a + 1; b < params.tier1; ++b) graph.add_p2p(asn_of(a), asn_of(b));

  // Preferential attachment urn: node i appears once plus once per customer.
  std::vector<std::uint32_t> urn;
  urn.reserve(params.nodes * 4);
  for (std::size_t i = 0; i < params.tier1; ++i) urn.push_back(static_cast<std::uint32_t>(i));
  std::vector<std::size_t> customers(params.nodes, 0);

  std::discrete_distribution<int> provider_count(params.provider_count_weights.begin(),
                                                 params.provider_count_weights.end());
  std::vector<std::uint32_t> chosen;
  for (std::size_t i = params.tier1; i < params.nodes; ++i) {
    std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(provider_count(rng)) + 1, i);
    chosen.clear();
    std::uniform_int_distribution<std::size_t> pick(0, urn.size() - 1);
    for (std::size_t attempts = 0; chosen.size() < want && attempts < 64 * want; ++attempts) {
      std::uint32_t p = urn[pick(rng)];
      if (std::find(chosen.begin(), chosen.end(), p) == chosen.end()) chosen.push_back(p);
    }
    for (std::uint32_t p : chosen) {
      graph.add_c2p(asn_of(i), asn_of(p));
      urn.push_back(p);
      ++customers[p];
    }
    urn.push_back(static_cast<std::uint32_t>(i));
  }

  std::vector<std::uint32_t> transit_urn;
  std::vector<std::uint32_t> stubs;
  for (std::size_t i = params.tier1; i < params.nodes; ++i) {
    if (customers[i] > 0) {
      for (std::size_t w = 0; w <= customers[i]; ++w) transit_urn.push_back(static_cast<std::uint32_t>(i));
    } else {
      stubs.push_back(static_cast<std::uint32_t>(i));
    }
  }

  auto try_peer = [&](std::uint32_t a, std::uint32_t b) {
    if (a == b) return;
    NodeId x = graph.id(asn_of(a));
    NodeId y = graph.id(asn_of(b));
    if (graph.neighbor_kind(x, y) != NeighborKind::None) return;
    graph.add_p2p(asn_of(a), asn_of(b));
  };

  if (!transit_urn.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, transit_urn.size() - 1);
    std::poisson_distribution<int> count(params.transit_peering);
    for (std::size_t i = params.tier1; i < params.nodes; ++i) {
      if (customers[i] == 0) continue;
      int k = count(rng);
      for (int j = 0; j < k; ++j) try_peer(static_cast<std::uint32_t>(i), transit_urn[pick(rng)]);
    }
  }
  if (stubs.size() > 1 && params.stub_peering > 0) {
    std::uniform_int_distribution<std::size_t> pick_stub(0, stubs.size() - 1);
    std::poisson_distribution<int> count(params.stub_peering);
    std::bernoulli_distribution to_transit(0.5);
    for (std::uint32_t s : stubs) {
      int k = count(rng);
      for (int j = 0; j < k; ++j) {
        if (!transit_urn.empty() && to_transit(rng)) {
          std::uniform_int_distribution<std::size_t> pick(0, transit_urn.size() - 1);
          try_peer(s, transit_urn[pick(rng)]);
        } else {
          try_peer(s, stubs[pick_stub(rng)]);
        }
      }
    }
  }
  return graph;
}

std::vector<Asn> pick_monitors(const AsGraph& graph, std::size_t count, std::uint64_t seed) {
  const std::size_t n = graph.node_count();
  if (count > n) throw SimulationError("more monitors requested than ASes in the topology");
  std::mt19937_64 rng(seed);
  // Weighted sampling without replacement (Efraimidis-Spirakis keys).
  std::vector<std::pair<double, NodeId>> keyed;
  keyed.reserve(n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (NodeId i = 0; i < n; ++i) {
    double degree = static_cast<double>(graph.providers(i).size() + graph.customers(i).size() + graph.peers(i).size());
    double w = 1.0 + degree;
    double r = u(rng);
    keyed.emplace_back(std::pow(r, 1.0 / w), i);
  }
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count), keyed.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  std::vector<Asn> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(graph.asn(keyed[i].second));
  std::sort(out.begin(), out.end());
  return out;
}

void write_as_rel(const AsGraph& graph, std::ostream& out) {
  out << "# synthetic AS relationships, serial-1\n";
  for (NodeId a = 0; a < graph.node_count(); ++a) {
    for (NodeId c : graph.customers(a)) out << graph.asn(a).value << '|' << graph.asn(c).value << "|-1\n";
    for (NodeId p : graph.peers(a))
      if (graph.asn(a) < graph.asn(p)) out << graph.asn(a).value << '|' << graph.asn(p).value << "|0\n";
  }
}

}  // namespace prefixguard
