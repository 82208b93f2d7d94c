#include "prefixguard/topology.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <string>

#include <fmt/format.h>

#include "prefixguard/errors.hpp"

namespace prefixguard {

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) { return (std::uint64_t{a} << 32) | b; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

NodeId AsGraph::add_node(Asn asn) {
  if (asn.value == 0) throw ParseError("AS number 0 is reserved");
  auto [it, inserted] = index_.emplace(asn, static_cast<NodeId>(asns_.size()));
  if (inserted) {
    asns_.push_back(asn);
    providers_.emplace_back();
    customers_.emplace_back();
    peers_.emplace_back();
    if (!is_monitor_.empty()) is_monitor_.push_back(false);
    invalidate();
  }
  return it->second;
}

std::optional<NodeId> AsGraph::find(Asn asn) const {
  auto it = index_.find(asn);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId AsGraph::id(Asn asn) const {
  auto it = index_.find(asn);
  if (it == index_.end()) throw SimulationError(fmt::format("AS{} is not in the topology", asn.value));
  return it->second;
}

void AsGraph::invalidate() {
  std::lock_guard lock(*order_mutex_);
  order_valid_ = false;
  order_.reset();
}

void AsGraph::link(NodeId a, NodeId b, NeighborKind b_for_a) {
  auto existing = kinds_.find(pair_key(a, b));
  if (existing != kinds_.end()) {
    if (existing->second == b_for_a) return;
    throw ParseError(fmt::format("conflicting relationships for AS{} and AS{}", asns_[a].value, asns_[b].value));
  }
  NeighborKind a_for_b = b_for_a == NeighborKind::Peer       ? NeighborKind::Peer
                         : b_for_a == NeighborKind::Customer ? NeighborKind::Provider
                                                             : NeighborKind::Customer;
  kinds_[pair_key(a, b)] = b_for_a;
  kinds_[pair_key(b, a)] = a_for_b;

  auto insert_sorted = [this](std::vector<NodeId>& list, NodeId n) {
    auto pos = std::lower_bound(list.begin(), list.end(), n,
                                [this](NodeId x, NodeId y) { return asns_[x] < asns_[y]; });
    list.insert(pos, n);
  };
  auto& list_for = [&]() -> std::vector<std::vector<NodeId>>& {
    switch (b_for_a) {
      case NeighborKind::Customer: return customers_;
      case NeighborKind::Provider: return providers_;
      default: return peers_;
    }
  }();
  insert_sorted(list_for[a], b);
  switch (a_for_b) {
    case NeighborKind::Customer: insert_sorted(customers_[b], a); break;
    case NeighborKind::Provider: insert_sorted(providers_[b], a); break;
    default: insert_sorted(peers_[b], a); break;
  }
  ++edges_;
  invalidate();
}

void AsGraph::add_c2p(Asn customer, Asn provider) {
  if (customer == provider) throw ParseError(fmt::format("self-edge on AS{}", customer.value));
  NodeId c = add_node(customer);
  NodeId p = add_node(provider);
  link(c, p, NeighborKind::Provider);
}

void AsGraph::add_p2p(Asn a, Asn b) {
  if (a == b) throw ParseError(fmt::format("self-edge on AS{}", a.value));
  NodeId x = add_node(a);
  NodeId y = add_node(b);
  link(x, y, NeighborKind::Peer);
}

NeighborKind AsGraph::neighbor_kind(NodeId a, NodeId b) const {
  auto it = kinds_.find(pair_key(a, b));
  return it == kinds_.end() ? NeighborKind::None : it->second;
}

std::vector<Asn> AsGraph::neighbors(Asn asn) const {
  NodeId n = id(asn);
  std::vector<Asn> out;
  for (auto* list : {&providers_[n], &customers_[n], &peers_[n]})
    for (NodeId m : *list) out.push_back(asns_[m]);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t AsGraph::set_monitors(std::span<const Asn> monitors) {
  monitors_.clear();
  is_monitor_.assign(asns_.size(), false);
  std::size_t skipped = 0;
  for (Asn a : monitors) {
    auto n = find(a);
    if (!n) {
      ++skipped;
      continue;
    }
    if (!is_monitor_[*n]) {
      is_monitor_[*n] = true;
      monitors_.push_back(*n);
    }
  }
  std::sort(monitors_.begin(), monitors_.end(), [this](NodeId x, NodeId y) { return asns_[x] < asns_[y]; });
  return skipped;
}

const std::optional<std::vector<NodeId>>& AsGraph::customer_first_order() const {
  std::lock_guard lock(*order_mutex_);
  if (order_valid_) return order_;
  // Kahn's algorithm on customer -> provider edges.
  std::vector<std::size_t> pending(asns_.size());
  std::vector<NodeId> ready;
  for (NodeId n = 0; n < asns_.size(); ++n) {
    pending[n] = customers_[n].size();
    if (pending[n] == 0) ready.push_back(n);
  }
  std::vector<NodeId> order;
  order.reserve(asns_.size());
  for (std::size_t i = 0; i < ready.size(); ++i) {
    NodeId n = ready[i];
    order.push_back(n);
    for (NodeId p : providers_[n])
      if (--pending[p] == 0) ready.push_back(p);
  }
  if (order.size() == asns_.size()) {
    order_ = std::move(order);
  } else {
    order_.reset();
  }
  order_valid_ = true;
  return order_;
}

void AsGraph::check_invariants() const {
  std::size_t half_edges = 0;
  for (NodeId a = 0; a < asns_.size(); ++a) {
    auto check = [&](const std::vector<NodeId>& list, NeighborKind kind, const std::vector<std::vector<NodeId>>& back) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        NodeId b = list[i];
        if (b == a) throw Error(fmt::format("self-edge on AS{}", asns_[a].value));
        if (i && list[i - 1] == b) throw Error(fmt::format("duplicate edge AS{}-AS{}", asns_[a].value, asns_[b].value));
        if (!std::binary_search(back[b].begin(), back[b].end(), a,
                                [this](NodeId x, NodeId y) { return asns_[x] < asns_[y]; })) {
          throw Error(fmt::format("asymmetric relationship AS{}-AS{}", asns_[a].value, asns_[b].value));
        }
        if (neighbor_kind(a, b) != kind) throw Error("relationship index out of sync");
        ++half_edges;
      }
    };
    check(providers_[a], NeighborKind::Provider, customers_);
    check(customers_[a], NeighborKind::Customer, providers_);
    check(peers_[a], NeighborKind::Peer, peers_);
  }
  if (half_edges != 2 * edges_) throw Error("edge count mismatch");
}

AsGraph parse_as_rel(std::istream& in) {
  AsGraph graph;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::string_view fields[3];
    for (int f = 0; f < 3; ++f) {
      auto bar = view.find('|');
      if (f < 2 && bar == std::string_view::npos) {
        throw ParseError(fmt::format("line {}: expected 'asn1|asn2|rel'", lineno));
      }
      fields[f] = view.substr(0, bar);
      view = bar == std::string_view::npos ? std::string_view{} : view.substr(bar + 1);
    }
    Asn a = Asn::parse(fields[0]);
    Asn b = Asn::parse(fields[1]);
    try {
      if (fields[2] == "-1") {
        graph.add_c2p(b, a);
      } else if (fields[2] == "0") {
        graph.add_p2p(a, b);
      } else {
        throw ParseError(fmt::format("unknown relationship code '{}'", fields[2]));
      }
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
  return graph;
}

AsGraph load_as_rel_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open topology file {}", path.string()));
  return parse_as_rel(in);
}

std::vector<Asn> parse_monitor_list(std::istream& in) {
  std::vector<Asn> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = trim(view.substr(0, hash));
    if (view.empty()) continue;
    out.push_back(Asn::parse(view));
  }
  return out;
}

std::vector<Asn> load_monitor_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open monitor file {}", path.string()));
  return parse_monitor_list(in);
}

MonitorLoad load_monitors(AsGraph graph, std::span<const Asn> asns) {
  MonitorLoad out{std::move(graph), 0};
  out.skipped = out.graph.set_monitors(asns);
  return out;
}

std::vector<Asn> customer_cone(const AsGraph& graph, NodeId node) {
  std::vector<bool> seen(graph.node_count(), false);
  std::vector<NodeId> stack(graph.customers(node).begin(), graph.customers(node).end());
  std::vector<Asn> cone;
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (seen[n] || n == node) continue;
    seen[n] = true;
    cone.push_back(graph.asn(n));
    for (NodeId c : graph.customers(n))
      if (!seen[c]) stack.push_back(c);
  }
  std::sort(cone.begin(), cone.end());
  return cone;
}

DegreeRankings degree_rankings(const AsGraph& graph) {
  const std::size_t n = graph.node_count();
  DegreeRankings r;
  r.provider_count.resize(n);
  r.cone_size.resize(n);

  // Stamp-based DFS reuses one visited array across all roots.
  std::vector<std::uint32_t> stamp(n, 0);
  std::vector<NodeId> stack;
  for (NodeId root = 0; root < n; ++root) {
    r.provider_count[root] = graph.providers(root).size();
    if (graph.customers(root).empty()) continue;
    const std::uint32_t mark = root + 1;
    stamp[root] = mark;
    std::size_t size = 0;
    stack.assign(graph.customers(root).begin(), graph.customers(root).end());
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      if (stamp[v] == mark) continue;
      stamp[v] = mark;
      ++size;
      for (NodeId c : graph.customers(v))
        if (stamp[c] != mark) stack.push_back(c);
    }
    r.cone_size[root] = size;
  }

  auto rank = [&](const std::vector<std::size_t>& key) {
    std::vector<NodeId> ids(n);
    for (NodeId i = 0; i < n; ++i) ids[i] = i;
    std::sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) {
      if (key[a] != key[b]) return key[a] > key[b];
      return graph.asn(a) < graph.asn(b);
    });
    std::vector<Asn> out;
    out.reserve(n);
    for (NodeId i : ids) out.push_back(graph.asn(i));
    return out;
  };
  r.by_providers = rank(r.provider_count);
  r.by_cone = rank(r.cone_size);
  return r;
}

}  // namespace prefixguard
