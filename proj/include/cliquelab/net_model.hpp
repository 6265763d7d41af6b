#pragma once

// Clique network vocabulary shared by both engines: identities, port
// mappings (full and partial) and the directed communication graph.
//
// Node indices in [0, n) belong to the simulator. Protocols never see them;
// a node only knows its Identity, its ports 1..n-1 and n.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cliquelab {

using NodeIndex = int;
using Port = int;

struct Identity {
  std::uint64_t value = 0;

  auto operator<=>(const Identity&) const = default;
};

class IdAssignment {
 public:
  IdAssignment() = default;

  // Throws InputError if ids are not pairwise distinct or fall outside
  // [1, universe_size].
  IdAssignment(std::vector<Identity> ids, std::uint64_t universe_size);

  // Identities 1..n in node order.
  static IdAssignment sequential(int n);

  // Uniform n-subset of [1, universe_size], assigned to nodes in random order.
  static IdAssignment random(int n, std::uint64_t universe_size, std::uint64_t seed);

  int size() const { return static_cast<int>(ids_.size()); }
  std::uint64_t universe_size() const { return universe_size_; }
  Identity operator[](NodeIndex u) const { return ids_.at(static_cast<std::size_t>(u)); }
  std::span<const Identity> ids() const { return ids_; }

  NodeIndex argmax() const;
  NodeIndex argmin() const;

 private:
  std::vector<Identity> ids_;
  std::uint64_t universe_size_ = 0;
};

struct Endpoint {
  NodeIndex node = 0;
  Port port = 0;

  auto operator<=>(const Endpoint&) const = default;
};

inline bool valid_endpoint(int n, Endpoint e) {
  return e.node >= 0 && e.node < n && e.port >= 1 && e.port <= n - 1;
}

// Total involution on endpoints with exactly one port pair per node pair.
class PortMapping {
 public:
  PortMapping() = default;

  // Builds from unordered endpoint pairs; throws InputError unless the pairs
  // form a valid total mapping for n nodes.
  static PortMapping from_pairs(int n, std::span<const std::pair<Endpoint, Endpoint>> pairs);

  int node_count() const { return n_; }

  // Throws InputError for endpoints outside the n-node clique.
  Endpoint resolve(Endpoint e) const;

  // Each unordered pair once, lower endpoint first, sorted.
  std::vector<std::pair<Endpoint, Endpoint>> pairs() const;

  // Port of u whose partner lives on v.
  Port port_towards(NodeIndex u, NodeIndex v) const;

  bool operator==(const PortMapping&) const = default;

 private:
  friend class PartialPortMapping;
  friend PortMapping random_port_mapping(int n, std::uint64_t seed);

  explicit PortMapping(int n);
  std::size_t slot(Endpoint e) const {
    return static_cast<std::size_t>(e.node) * static_cast<std::size_t>(n_ - 1) +
           static_cast<std::size_t>(e.port - 1);
  }

  int n_ = 0;
  std::vector<Endpoint> partner_;
};

// Uniformly random valid mapping; a pure function of (n, seed).
PortMapping random_port_mapping(int n, std::uint64_t seed);

class PartialPortMapping {
 public:
  explicit PartialPortMapping(int n);

  int node_count() const { return n_; }

  // Partner endpoint, or nullopt while e is unassigned.
  std::optional<Endpoint> resolve(Endpoint e) const;
  bool is_assigned(Endpoint e) const { return resolve(e).has_value(); }

  // Pairs a with b. Throws AssignmentError if either is already assigned,
  // both belong to one node, or the two nodes are already connected.
  void assign(Endpoint a, Endpoint b);

  bool connected(NodeIndex u, NodeIndex v) const;
  std::optional<Port> lowest_free_port(NodeIndex u) const;
  int assigned_pairs() const { return assigned_pairs_; }

  // Greedy pairing of the remaining endpoints, shuffled by seed. Always
  // succeeds: a node's free ports match its unconnected partners one to one.
  PortMapping complete(std::uint64_t seed) const;

 private:
  std::size_t slot(Endpoint e) const {
    return static_cast<std::size_t>(e.node) * static_cast<std::size_t>(n_ - 1) +
           static_cast<std::size_t>(e.port - 1);
  }

  int n_ = 0;
  std::vector<Endpoint> partner_;        // port 0 marks unassigned
  std::vector<std::uint8_t> connected_;  // n x n
  int assigned_pairs_ = 0;
};

// Directed who-sent-to-whom graph; edge (u,v) once some message from u was
// delivered to v.
class CommGraph {
 public:
  CommGraph() = default;
  explicit CommGraph(int n);

  int node_count() const { return n_; }

  // Idempotent. Throws InputError on u == v or out-of-range nodes.
  void record_send(NodeIndex u, NodeIndex v);

  bool has_edge(NodeIndex u, NodeIndex v) const;
  // Edge in either direction.
  bool touched(NodeIndex u, NodeIndex v) const { return has_edge(u, v) || has_edge(v, u); }
  std::size_t edge_count() const { return edges_.size(); }
  // In insertion order.
  std::span<const std::pair<NodeIndex, NodeIndex>> edges() const { return edges_; }

 private:
  int n_ = 0;
  std::vector<std::uint8_t> adj_;
  std::vector<std::pair<NodeIndex, NodeIndex>> edges_;
};

// Weakly connected components, each sorted, ordered by smallest member.
std::vector<std::vector<NodeIndex>> weak_components(const CommGraph& g);

// Largest lambda such that every member of c has at least lambda members of
// c it has not communicated with. Throws InputError unless c is exactly one
// component of g.
int capacity(const CommGraph& g, std::span<const NodeIndex> c);

// True iff no edge crosses the boundary of s in either direction.
bool is_isolated(const CommGraph& g, std::span<const NodeIndex> s);

nlohmann::json to_json(const PortMapping& pm);
nlohmann::json to_json(const CommGraph& g);
PortMapping port_mapping_from_json(const nlohmann::json& j);
CommGraph comm_graph_from_json(const nlohmann::json& j);

}  // namespace cliquelab
