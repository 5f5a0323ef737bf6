// Random-placement topology generation: nodes uniform over a square area,
// an edge wherever two nodes sit within radio range, edges tagged weak by a
// seeded draw. Regenerates (bounded) until connected.
#ifndef SIXMESH_TOPOLOGY_HPP_
#define SIXMESH_TOPOLOGY_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "sixmesh/types.hpp"

namespace sixmesh {

class DisconnectedTopology : public std::runtime_error {
 public:
  explicit DisconnectedTopology(const std::string& what) : std::runtime_error(what) {}
};

struct Position {
  double x = 0;
  double y = 0;
};

struct Topology {
  std::map<std::uint16_t, Position> positions;           // keyed by address value
  std::map<std::uint16_t, std::vector<Address>> adjacency;
  std::set<std::pair<std::uint16_t, std::uint16_t>> weak_edges;  // (lo, hi)

  std::size_t edge_count() const;
  bool has_edge(Address a, Address b) const;
  bool edge_is_weak(Address a, Address b) const;
  const std::vector<Address>& neighbors(Address a) const;

  // BFS hop distance over nodes passing `alive`; returns -1 if unreachable.
  int hop_distance(Address from, Address to) const;
  template <typename AliveFn>
  int hop_distance_if(Address from, Address to, AliveFn alive) const;

  bool connected() const;

  // The pair of nodes at maximum hop distance (lowest addresses on ties).
  std::pair<Address, Address> farthest_pair() const;

  // Explicit construction for fixed scenarios and tests.
  static Topology from_edges(const std::vector<std::pair<std::uint16_t, std::uint16_t>>& edges,
                             const std::set<std::pair<std::uint16_t, std::uint16_t>>& weak = {});
};

struct TopologySpec {
  double area_m = 1500.0;
  std::uint16_t node_count = 50;
  double radio_range_m = 350.0;
  double weak_link_fraction = 0.15;
  std::uint64_t seed = 1;
  int max_retries = 100;
};

// Throws DisconnectedTopology when no connected placement is found within
// the retry bound.
Topology build_topology(const TopologySpec& spec);

template <typename AliveFn>
int Topology::hop_distance_if(Address from, Address to, AliveFn alive) const {
  if (from == to) return 0;
  if (!alive(from) || !alive(to)) return -1;
  std::map<std::uint16_t, int> dist;
  dist[from.value] = 0;
  std::vector<Address> frontier{from};
  while (!frontier.empty()) {
    std::vector<Address> next;
    for (Address u : frontier) {
      const int du = dist[u.value];
      auto it = adjacency.find(u.value);
      if (it == adjacency.end()) continue;
      for (Address v : it->second) {
        if (!alive(v) || dist.count(v.value)) continue;
        dist[v.value] = du + 1;
        if (v == to) return du + 1;
        next.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return -1;
}

}  // namespace sixmesh

#endif  // SIXMESH_TOPOLOGY_HPP_
