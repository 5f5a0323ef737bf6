// Baseline local repair: on a link break the upstream node floods an
// ordinary RREQ on behalf of the originator (no TTL bound), waits for the
// destination's RREP, and on failure reports a rate-limited RERR back.
#ifndef SIXMESH_LOAD_HPP_
#define SIXMESH_LOAD_HPP_

#include <cstdint>
#include <deque>

#include "sixmesh/types.hpp"

namespace sixmesh {

struct NodeState;

// Strict rate limiter: at most one emission per 1/rate seconds.
struct RerrBudget {
  SimTime period = US_PER_SECOND;  // derived from the configured rate
  SimTime next_allowed = 0;

  bool try_consume(SimTime now) {
    if (now < next_allowed) return false;
    next_allowed = now + period;
    return true;
  }
};

struct LoadRepairSession {
  std::uint32_t id = 0;
  Address upstream;
  Address abandoned;
  Address final_dest;
  Address data_originator;
  SimTime deadline = 0;
  std::uint8_t rreq_id = 0;
  std::deque<DataPacket> buffered;
};

namespace load {

// Link-break entry point; floods the repair RREQ and buffers the packet.
Actions detect_link_break(NodeState& node, Address failed_next_hop, const DataPacket& packet,
                          SimTime now);

// Called when the repairing node's route to session.final_dest became valid
// again (its RREP arrived). Flushes the buffer and closes the session.
Actions complete_repair(NodeState& node, std::uint32_t session_id, SimTime now);

// Repair deadline expiry: RERR toward the data originator if the rate
// budget permits, otherwise the buffered packets are discarded silently.
Actions handle_repair_failure(NodeState& node, std::uint32_t session_id, SimTime now);

}  // namespace load

}  // namespace sixmesh

#endif  // SIXMESH_LOAD_HPP_
