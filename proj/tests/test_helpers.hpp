// Shared helpers for protocol-level unit tests: bare node states and action
// inspection without the engine.
#ifndef SIXMESH_TEST_HELPERS_HPP_
#define SIXMESH_TEST_HELPERS_HPP_

#include <optional>
#include <vector>

#include "sixmesh/node_state.hpp"
#include "sixmesh/routing.hpp"

namespace sixmesh::test {

inline NodeState make_node(std::uint16_t addr, Protocol protocol = Protocol::LRABC,
                           double battery_mah = 10.0) {
  NodeState node;
  node.addr = Address{addr};
  node.params.protocol = protocol;
  node.battery.capacity = mah_to_energy(battery_mah);
  node.battery.remaining = node.battery.capacity;
  return node;
}

inline DataPacket make_packet(std::uint16_t src, std::uint16_t dest, std::uint32_t seq = 0) {
  DataPacket pkt;
  pkt.flow = 0;
  pkt.seq = seq;
  pkt.src = Address{src};
  pkt.dest = Address{dest};
  pkt.size_bytes = 50;
  return pkt;
}

template <typename T>
std::vector<const T*> actions_of(const Actions& actions) {
  std::vector<const T*> out;
  for (const auto& a : actions)
    if (const T* p = std::get_if<T>(&a)) out.push_back(p);
  return out;
}

template <typename T>
const T* first_action(const Actions& actions) {
  for (const auto& a : actions)
    if (const T* p = std::get_if<T>(&a)) return p;
  return nullptr;
}

inline std::optional<DropReason> drop_reason(const Actions& actions) {
  if (const auto* d = first_action<ActionDrop>(actions)) return d->reason;
  return std::nullopt;
}

inline WireAel wire_mah(double mah) { return energy_to_wire_ael(mah_to_energy(mah)); }

}  // namespace sixmesh::test

#endif  // SIXMESH_TEST_HELPERS_HPP_
