#include "cliquelab/net_model.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_set>

#include "cliquelab/errors.hpp"
#include "cliquelab/rng.hpp"

namespace cliquelab {

namespace {

std::string endpoint_str(Endpoint e) {
  return "(" + std::to_string(e.node) + "," + std::to_string(e.port) + ")";
}

void require_endpoint(int n, Endpoint e) {
  if (!valid_endpoint(n, e)) {
    throw InputError("endpoint " + endpoint_str(e) + " invalid for n=" + std::to_string(n));
  }
}

}  // namespace

IdAssignment::IdAssignment(std::vector<Identity> ids, std::uint64_t universe_size)
    : ids_(std::move(ids)), universe_size_(universe_size) {
  std::unordered_set<std::uint64_t> seen;
  for (auto id : ids_) {
    if (id.value < 1 || id.value > universe_size_) {
      throw InputError("identity " + std::to_string(id.value) + " outside [1, " +
                       std::to_string(universe_size_) + "]");
    }
    if (!seen.insert(id.value).second) {
      throw InputError("duplicate identity " + std::to_string(id.value));
    }
  }
}

IdAssignment IdAssignment::sequential(int n) {
  std::vector<Identity> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) ids.push_back({static_cast<std::uint64_t>(i)});
  return IdAssignment(std::move(ids), static_cast<std::uint64_t>(std::max(n, 1)));
}

IdAssignment IdAssignment::random(int n, std::uint64_t universe_size, std::uint64_t seed) {
  if (n < 0 || static_cast<std::uint64_t>(n) > universe_size) {
    throw InputError("cannot draw " + std::to_string(n) + " identities from a universe of " +
                     std::to_string(universe_size));
  }
  Rng rng(seed);
  // Floyd's sampling of an n-subset.
  std::unordered_set<std::uint64_t> chosen;
  std::vector<Identity> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (std::uint64_t j = universe_size - static_cast<std::uint64_t>(n) + 1; j <= universe_size; ++j) {
    std::uniform_int_distribution<std::uint64_t> pick(1, j);
    std::uint64_t t = pick(rng);
    if (!chosen.insert(t).second) {
      chosen.insert(j);
      t = j;
    }
    ids.push_back({t});
  }
  std::shuffle(ids.begin(), ids.end(), rng);
  return IdAssignment(std::move(ids), universe_size);
}

NodeIndex IdAssignment::argmax() const {
  return static_cast<NodeIndex>(std::max_element(ids_.begin(), ids_.end()) - ids_.begin());
}

NodeIndex IdAssignment::argmin() const {
  return static_cast<NodeIndex>(std::min_element(ids_.begin(), ids_.end()) - ids_.begin());
}

PortMapping::PortMapping(int n)
    : n_(n),
      partner_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n > 0 ? n - 1 : 0)) {}

PortMapping PortMapping::from_pairs(int n, std::span<const std::pair<Endpoint, Endpoint>> pairs) {
  if (n < 1) throw InputError("node count must be positive");
  PartialPortMapping partial(n);
  try {
    for (const auto& [a, b] : pairs) partial.assign(a, b);
  } catch (const AssignmentError& e) {
    throw InputError(std::string("invalid port mapping: ") + e.what());
  }
  const long long expected = static_cast<long long>(n) * (n - 1) / 2;
  if (partial.assigned_pairs() != expected) {
    throw InputError("port mapping is not total: " + std::to_string(partial.assigned_pairs()) +
                     " of " + std::to_string(expected) + " pairs");
  }
  return partial.complete(0);
}

Endpoint PortMapping::resolve(Endpoint e) const {
  require_endpoint(n_, e);
  return partner_[slot(e)];
}

std::vector<std::pair<Endpoint, Endpoint>> PortMapping::pairs() const {
  std::vector<std::pair<Endpoint, Endpoint>> out;
  for (NodeIndex u = 0; u < n_; ++u) {
    for (Port p = 1; p < n_; ++p) {
      Endpoint a{u, p};
      Endpoint b = partner_[slot(a)];
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

Port PortMapping::port_towards(NodeIndex u, NodeIndex v) const {
  for (Port p = 1; p < n_; ++p) {
    if (partner_[slot({u, p})].node == v) return p;
  }
  throw InputError("no port from " + std::to_string(u) + " to " + std::to_string(v));
}

PortMapping random_port_mapping(int n, std::uint64_t seed) {
  if (n < 1) throw InputError("node count must be positive");
  PortMapping pm(n);
  if (n == 1) return pm;
  Rng rng(seed);
  const auto un = static_cast<std::size_t>(n);
  // Each node independently wires its ports to a random permutation of the
  // other nodes; every valid mapping arises from exactly one such choice.
  std::vector<NodeIndex> target(un * (un - 1));
  std::vector<Port> port_to(un * un, 0);
  std::vector<NodeIndex> others(un - 1);
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex v = 0, k = 0; v < n; ++v) {
      if (v != u) others[static_cast<std::size_t>(k++)] = v;
    }
    std::shuffle(others.begin(), others.end(), rng);
    for (Port p = 1; p < n; ++p) {
      const NodeIndex v = others[static_cast<std::size_t>(p - 1)];
      target[static_cast<std::size_t>(u) * (un - 1) + static_cast<std::size_t>(p - 1)] = v;
      port_to[static_cast<std::size_t>(u) * un + static_cast<std::size_t>(v)] = p;
    }
  }
  for (NodeIndex u = 0; u < n; ++u) {
    for (Port p = 1; p < n; ++p) {
      const auto s = static_cast<std::size_t>(u) * (un - 1) + static_cast<std::size_t>(p - 1);
      const NodeIndex v = target[s];
      pm.partner_[s] = Endpoint{v, port_to[static_cast<std::size_t>(v) * un + static_cast<std::size_t>(u)]};
    }
  }
  return pm;
}

PartialPortMapping::PartialPortMapping(int n)
    : n_(n),
      partner_(static_cast<std::size_t>(std::max(n, 0)) * static_cast<std::size_t>(n > 0 ? n - 1 : 0),
               Endpoint{0, 0}),
      connected_(static_cast<std::size_t>(std::max(n, 0)) * static_cast<std::size_t>(std::max(n, 0)), 0) {
  if (n < 1) throw InputError("node count must be positive");
}

std::optional<Endpoint> PartialPortMapping::resolve(Endpoint e) const {
  require_endpoint(n_, e);
  const Endpoint p = partner_[slot(e)];
  if (p.port == 0) return std::nullopt;
  return p;
}

void PartialPortMapping::assign(Endpoint a, Endpoint b) {
  require_endpoint(n_, a);
  require_endpoint(n_, b);
  if (a.node == b.node) {
    throw AssignmentError("endpoints " + endpoint_str(a) + " and " + endpoint_str(b) +
                          " belong to the same node");
  }
  if (partner_[slot(a)].port != 0) throw AssignmentError("endpoint " + endpoint_str(a) + " already assigned");
  if (partner_[slot(b)].port != 0) throw AssignmentError("endpoint " + endpoint_str(b) + " already assigned");
  if (connected(a.node, b.node)) {
    throw AssignmentError("nodes " + std::to_string(a.node) + " and " + std::to_string(b.node) +
                          " are already connected");
  }
  partner_[slot(a)] = b;
  partner_[slot(b)] = a;
  const auto un = static_cast<std::size_t>(n_);
  connected_[static_cast<std::size_t>(a.node) * un + static_cast<std::size_t>(b.node)] = 1;
  connected_[static_cast<std::size_t>(b.node) * un + static_cast<std::size_t>(a.node)] = 1;
  ++assigned_pairs_;
}

bool PartialPortMapping::connected(NodeIndex u, NodeIndex v) const {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw InputError("node index out of range");
  return connected_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v)] != 0;
}

std::optional<Port> PartialPortMapping::lowest_free_port(NodeIndex u) const {
  for (Port p = 1; p < n_; ++p) {
    if (partner_[slot({u, p})].port == 0) return p;
  }
  return std::nullopt;
}

PortMapping PartialPortMapping::complete(std::uint64_t seed) const {
  PortMapping pm(n_);
  if (n_ == 1) return pm;
  Rng rng(seed);
  std::vector<std::vector<Port>> free(static_cast<std::size_t>(n_));
  for (NodeIndex u = 0; u < n_; ++u) {
    auto& list = free[static_cast<std::size_t>(u)];
    for (Port p = 1; p < n_; ++p) {
      if (partner_[slot({u, p})].port == 0) list.push_back(p);
    }
    std::shuffle(list.begin(), list.end(), rng);
  }
  pm.partner_ = partner_;
  for (NodeIndex u = 0; u < n_; ++u) {
    for (NodeIndex v = u + 1; v < n_; ++v) {
      if (connected(u, v)) continue;
      auto& fu = free[static_cast<std::size_t>(u)];
      auto& fv = free[static_cast<std::size_t>(v)];
      const Endpoint a{u, fu.back()};
      const Endpoint b{v, fv.back()};
      fu.pop_back();
      fv.pop_back();
      pm.partner_[pm.slot(a)] = b;
      pm.partner_[pm.slot(b)] = a;
    }
  }
  return pm;
}

CommGraph::CommGraph(int n)
    : n_(n), adj_(static_cast<std::size_t>(std::max(n, 0)) * static_cast<std::size_t>(std::max(n, 0)), 0) {}

void CommGraph::record_send(NodeIndex u, NodeIndex v) {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw InputError("node index out of range");
  if (u == v) throw InputError("self edge " + std::to_string(u));
  auto& cell = adj_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v)];
  if (cell == 0) {
    cell = 1;
    edges_.emplace_back(u, v);
  }
}

bool CommGraph::has_edge(NodeIndex u, NodeIndex v) const {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) throw InputError("node index out of range");
  return adj_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v)] != 0;
}

std::vector<std::vector<NodeIndex>> weak_components(const CommGraph& g) {
  const int n = g.node_count();
  std::vector<NodeIndex> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](NodeIndex x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (const auto& [u, v] : g.edges()) {
    const NodeIndex a = find(u), b = find(v);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  std::vector<std::vector<NodeIndex>> by_root(static_cast<std::size_t>(n));
  for (NodeIndex u = 0; u < n; ++u) by_root[static_cast<std::size_t>(find(u))].push_back(u);
  std::vector<std::vector<NodeIndex>> out;
  for (auto& c : by_root) {
    if (!c.empty()) out.push_back(std::move(c));
  }
  return out;
}

int capacity(const CommGraph& g, std::span<const NodeIndex> c) {
  std::vector<NodeIndex> sorted(c.begin(), c.end());
  std::sort(sorted.begin(), sorted.end());
  bool is_component = false;
  for (const auto& comp : weak_components(g)) {
    if (comp == sorted) {
      is_component = true;
      break;
    }
  }
  if (!is_component) throw InputError("node set is not a component of the graph");
  const int size = static_cast<int>(sorted.size());
  int best = size - 1;
  for (NodeIndex u : sorted) {
    int touched = 0;
    for (NodeIndex v : sorted) {
      if (v != u && g.touched(u, v)) ++touched;
    }
    best = std::min(best, size - 1 - touched);
  }
  return best;
}

bool is_isolated(const CommGraph& g, std::span<const NodeIndex> s) {
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(g.node_count()), 0);
  for (NodeIndex u : s) {
    if (u < 0 || u >= g.node_count()) throw InputError("node index out of range");
    inside[static_cast<std::size_t>(u)] = 1;
  }
  for (const auto& [u, v] : g.edges()) {
    if (inside[static_cast<std::size_t>(u)] != inside[static_cast<std::size_t>(v)]) return false;
  }
  return true;
}

nlohmann::json to_json(const PortMapping& pm) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : pm.pairs()) {
    pairs.push_back({{a.node, a.port}, {b.node, b.port}});
  }
  return {{"n", pm.node_count()}, {"pairs", std::move(pairs)}};
}

nlohmann::json to_json(const CommGraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  return {{"n", g.node_count()}, {"edges", std::move(edges)}};
}

PortMapping port_mapping_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  std::vector<std::pair<Endpoint, Endpoint>> pairs;
  for (const auto& p : j.at("pairs")) {
    pairs.emplace_back(Endpoint{p.at(0).at(0).get<int>(), p.at(0).at(1).get<int>()},
                       Endpoint{p.at(1).at(0).get<int>(), p.at(1).at(1).get<int>()});
  }
  return PortMapping::from_pairs(n, pairs);
}

CommGraph comm_graph_from_json(const nlohmann::json& j) {
  CommGraph g(j.at("n").get<int>());
  for (const auto& e : j.at("edges")) g.record_send(e.at(0).get<int>(), e.at(1).get<int>());
  return g;
}

}  // namespace cliquelab
