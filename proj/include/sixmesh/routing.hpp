// Route discovery and forwarding shared by both protocols, written as pure
// event-in / action-out transitions over the owning node's state.
#ifndef SIXMESH_ROUTING_HPP_
#define SIXMESH_ROUTING_HPP_

#include "sixmesh/node_state.hpp"

namespace sixmesh::routing {

// Running mean of node energy levels along a path, in wire 8.8 fixed point:
// (ael_in * nodes_in + el_node) / (nodes_in + 1), rounded to nearest.
// nodes_in is how many energy levels ael_in already averages.
WireAel compute_ael_update(WireAel ael_in, std::uint32_t nodes_in, WireAel el_node);

// Starts a route discovery for dest, or returns no actions when one is
// already pending or a valid route exists (the caller should consult
// route_lookup first for the data path).
Actions originate_route_discovery(NodeState& node, Address dest, SimTime now);

// Returns the valid, unexpired entry or nullptr. Expired entries are marked
// invalid. Self lookups return a synthetic zero-hop entry.
RoutingEntry* route_lookup(NodeState& node, Address dest, SimTime now);

// Frame dispatch. sender is the link-layer transmitter the frame arrived
// from; weak_in tells whether that link is tagged weak.
Actions handle_frame(NodeState& node, const Frame& frame, Address sender, SimTime now);

Actions handle_rreq(NodeState& node, const ControlMessage& msg, Address sender, SimTime now);
Actions handle_rrep(NodeState& node, const ControlMessage& msg, Address sender, SimTime now);
Actions handle_rerr(NodeState& node, const ControlMessage& msg, Address sender, SimTime now);
Actions handle_data(NodeState& node, const Frame& frame, Address sender, SimTime now);

// Application-layer send at the packet's source.
Actions app_send(NodeState& node, const DataPacket& pkt, SimTime now);

// MAC retry exhaustion on a data transmission; dispatches to the protocol's
// link-repair path. The frame is needed for its bypass-path context.
Actions link_break(NodeState& node, Address failed_next_hop, const Frame& frame, SimTime now);

// Timer dispatch for every TimerKind.
Actions handle_timer(NodeState& node, TimerKind kind, std::uint64_t key, SimTime now);

// Internal helpers shared with the repair modules.
Actions emit_rerr(NodeState& node, RerrCode code, Address failed_dest, Address data_originator,
                  SimTime now);
Actions forward_data(NodeState& node, const DataPacket& pkt, SimTime now);
Actions forward_data(NodeState& node, const DataPacket& pkt, SimTime now,
                     std::uint8_t hops_so_far, Address from);
void install_route(NodeState& node, Address dest, Address next_hop, Address second_next_hop,
                   std::uint8_t hop_count, std::uint8_t weak_links, WireAel path_ael, SimTime now);

}  // namespace sixmesh::routing

#endif  // SIXMESH_ROUTING_HPP_
