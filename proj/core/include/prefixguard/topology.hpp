#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "prefixguard/types.hpp"

namespace prefixguard {

enum class Relationship : std::uint8_t { CustomerToProvider, PeerToPeer };

/// Dense node index into an AsGraph. Stable for the graph's lifetime.
using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = ~NodeId{0};

/// How `b` relates to `a`, seen from `a`.
enum class NeighborKind : std::uint8_t { None, Customer, Peer, Provider };

/// AS-level topology annotated with c2p / p2p relationships, plus the monitor set.
///
/// Nodes are assigned dense ids in insertion order. Adjacency lists are kept
/// sorted by ASN so that every traversal is deterministic.
class AsGraph {
 public:
  /// `customer` buys transit from `provider`. Throws ParseError on self-edges
  /// or when the pair already carries a different relationship; an identical
  /// repeat is ignored.
  void add_c2p(Asn customer, Asn provider);
  void add_p2p(Asn a, Asn b);
  NodeId add_node(Asn asn);

  [[nodiscard]] std::size_t node_count() const { return asns_.size(); }
  [[nodiscard]] std::size_t edge_count() const { return edges_; }
  [[nodiscard]] bool contains(Asn asn) const { return index_.count(asn) != 0; }
  [[nodiscard]] std::optional<NodeId> find(Asn asn) const;
  /// Throws SimulationError for unknown ASNs.
  [[nodiscard]] NodeId id(Asn asn) const;
  [[nodiscard]] Asn asn(NodeId node) const { return asns_[node]; }
  [[nodiscard]] std::span<const Asn> asns() const { return asns_; }

  [[nodiscard]] std::span<const NodeId> providers(NodeId n) const { return providers_[n]; }
  [[nodiscard]] std::span<const NodeId> customers(NodeId n) const { return customers_[n]; }
  [[nodiscard]] std::span<const NodeId> peers(NodeId n) const { return peers_[n]; }
  [[nodiscard]] NeighborKind neighbor_kind(NodeId a, NodeId b) const;
  [[nodiscard]] std::vector<Asn> neighbors(Asn asn) const;

  /// Replaces the monitor set. Unknown ASNs are skipped; returns how many.
  std::size_t set_monitors(std::span<const Asn> monitors);
  [[nodiscard]] std::span<const NodeId> monitors() const { return monitors_; }
  [[nodiscard]] bool is_monitor(NodeId n) const { return !is_monitor_.empty() && is_monitor_[n]; }

  /// Nodes ordered so that every customer precedes all of its providers.
  /// Empty optional when the provider relation has a cycle.
  [[nodiscard]] const std::optional<std::vector<NodeId>>& customer_first_order() const;

  /// Full scan of relationship symmetry and edge uniqueness. Throws on violation.
  void check_invariants() const;

 private:
  void link(NodeId a, NodeId b, NeighborKind b_for_a);
  void invalidate();

  std::vector<Asn> asns_;
  std::unordered_map<Asn, NodeId> index_;
  std::vector<std::vector<NodeId>> providers_;
  std::vector<std::vector<NodeId>> customers_;
  std::vector<std::vector<NodeId>> peers_;
  std::unordered_map<std::uint64_t, NeighborKind> kinds_;
  std::size_t edges_ = 0;
  std::vector<NodeId> monitors_;
  std::vector<bool> is_monitor_;
  // Lazily computed; guarded so concurrent readers of a finished graph are safe.
  mutable std::shared_ptr<std::mutex> order_mutex_ = std::make_shared<std::mutex>();
  mutable bool order_valid_ = false;
  mutable std::optional<std::vector<NodeId>> order_;
};

/// CAIDA serial-1: "asn1|asn2|rel", rel -1 = asn1 provider of asn2, 0 = peers.
/// '#' lines are comments; LF or CRLF. Extra trailing '|' fields are ignored.
AsGraph parse_as_rel(std::istream& in);
AsGraph load_as_rel_file(const std::filesystem::path& path);

/// One ASN per line, '#' comments and blank lines ignored.
std::vector<Asn> parse_monitor_list(std::istream& in);
std::vector<Asn> load_monitor_file(const std::filesystem::path& path);

struct MonitorLoad {
  AsGraph graph;
  std::size_t skipped = 0;
};

/// Value-semantics wrapper over AsGraph::set_monitors.
MonitorLoad load_monitors(AsGraph graph, std::span<const Asn> asns);

/// Per-AS provider counts and customer-cone sizes with descending rankings.
struct DegreeRankings {
  std::vector<std::size_t> provider_count;  // by NodeId
  std::vector<std::size_t> cone_size;       // by NodeId; excludes the AS itself
  std::vector<Asn> by_providers;            // descending count, ties by ascending ASN
  std::vector<Asn> by_cone;                 // descending cone size, ties by ascending ASN
};

DegreeRankings degree_rankings(const AsGraph& graph);

/// ASes reachable from `node` following provider->customer edges only, sorted by ASN.
std::vector<Asn> customer_cone(const AsGraph& graph, NodeId node);

}  // namespace prefixguard
