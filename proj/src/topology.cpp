#include "sixmesh/topology.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sixmesh {

namespace {

// Uniform double in [0, 1) from the top 53 bits; keeps draws independent of
// library-specific distribution internals.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::pair<std::uint16_t, std::uint16_t> edge_key(Address a, Address b) {
  return a.value < b.value ? std::make_pair(a.value, b.value) : std::make_pair(b.value, a.value);
}

}  // namespace

std::size_t Topology::edge_count() const {
  std::size_t twice = 0;
  for (const auto& [node, adj] : adjacency) twice += adj.size();
  return twice / 2;
}

bool Topology::has_edge(Address a, Address b) const {
  auto it = adjacency.find(a.value);
  if (it == adjacency.end()) return false;
  return std::find(it->second.begin(), it->second.end(), b) != it->second.end();
}

bool Topology::edge_is_weak(Address a, Address b) const {
  return weak_edges.count(edge_key(a, b)) != 0;
}

const std::vector<Address>& Topology::neighbors(Address a) const {
  static const std::vector<Address> empty;
  auto it = adjacency.find(a.value);
  return it == adjacency.end() ? empty : it->second;
}

int Topology::hop_distance(Address from, Address to) const {
  return hop_distance_if(from, to, [](Address) { return true; });
}

bool Topology::connected() const {
  if (positions.empty()) return true;
  const Address start{positions.begin()->first};
  std::set<std::uint16_t> seen{start.value};
  std::vector<Address> frontier{start};
  while (!frontier.empty()) {
    std::vector<Address> next;
    for (Address u : frontier) {
      for (Address v : neighbors(u)) {
        if (seen.insert(v.value).second) next.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return seen.size() == positions.size();
}

std::pair<Address, Address> Topology::farthest_pair() const {
  std::pair<Address, Address> best{Address{0}, Address{0}};
  int best_dist = -1;
  for (const auto& [a, pos_a] : positions) {
    for (const auto& [b, pos_b] : positions) {
      if (b <= a) continue;
      const int d = hop_distance(Address{a}, Address{b});
      if (d > best_dist) {
        best_dist = d;
        best = {Address{a}, Address{b}};
      }
    }
  }
  return best;
}

Topology Topology::from_edges(const std::vector<std::pair<std::uint16_t, std::uint16_t>>& edges,
                              const std::set<std::pair<std::uint16_t, std::uint16_t>>& weak) {
  Topology topo;
  for (const auto& [a, b] : edges) {
    topo.positions[a];
    topo.positions[b];
    topo.adjacency[a].push_back(Address{b});
    topo.adjacency[b].push_back(Address{a});
  }
  for (auto& [node, adj] : topo.adjacency) std::sort(adj.begin(), adj.end());
  for (const auto& [a, b] : weak) topo.weak_edges.insert(edge_key(Address{a}, Address{b}));
  return topo;
}

Topology build_topology(const TopologySpec& spec) {
  for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(attempt));
    Topology topo;
    for (std::uint16_t i = 1; i <= spec.node_count; ++i) {
      topo.positions[i] = Position{uniform01(rng) * spec.area_m, uniform01(rng) * spec.area_m};
      topo.adjacency[i];
    }
    for (std::uint16_t a = 1; a <= spec.node_count; ++a) {
      for (std::uint16_t b = static_cast<std::uint16_t>(a + 1); b <= spec.node_count; ++b) {
        const double dx = topo.positions[a].x - topo.positions[b].x;
        const double dy = topo.positions[a].y - topo.positions[b].y;
        if (std::hypot(dx, dy) <= spec.radio_range_m) {
          topo.adjacency[a].push_back(Address{b});
          topo.adjacency[b].push_back(Address{a});
          if (uniform01(rng) < spec.weak_link_fraction)
            topo.weak_edges.insert({a, b});
        }
      }
    }
    if (topo.connected()) return topo;
  }
  throw DisconnectedTopology("no connected placement within retry bound (seed " +
                             std::to_string(spec.seed) + ")");
}

}  // namespace sixmesh
