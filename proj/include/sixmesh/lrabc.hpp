// Bee-colony local link repair: the upstream node that detects a break
// floods a TTL-bounded Local_RREQ toward the second next hop, collects one
// Local_RREP per discovered path, and patches its route to the candidate
// with the best mean residual energy.
#ifndef SIXMESH_LRABC_HPP_
#define SIXMESH_LRABC_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "sixmesh/types.hpp"

namespace sixmesh {

struct NodeState;

// One discovered local route LR_j from the upstream node to the second next
// hop. Fitness is the 8.8 fixed-point mean of node energy levels along the
// path, folded hop by hop on the reply leg.
struct CandidateLink {
  Address next_hop_toward_snh;
  std::uint8_t hop_count = 0;  // path edge count, >= 1
  WireAel ael = 0;
  std::uint8_t wl = 0;
  std::uint8_t rrep_id = 0;
  std::vector<Address> path;  // upstream..snh, engine metadata
};

// Total order on candidates: higher mean energy wins, then fewer hops, then
// fewer weak links, then the lower next-hop address. Returns <0, 0, >0 with
// negative meaning `a` is the better candidate.
int compare_local_links(const CandidateLink& a, const CandidateLink& b);

// Repair state at the upstream node.
struct RepairSession {
  std::uint32_t id = 0;
  Address upstream;
  Address abandoned;
  Address second_next_hop;
  Address final_dest;
  Address data_originator;
  std::optional<CandidateLink> best_link;
  BeePhase phase = BeePhase::Idle;
  SimTime deadline = 0;
  std::uint32_t trials_used = 0;
  std::uint8_t rreq_id = 0;  // flood id of the current trial
  std::vector<std::uint8_t> trial_rreq_ids;
  std::deque<DataPacket> buffered;
  std::set<Address> participants;  // emergent colony size, from candidate paths
  // When the broken hop was the first relayer of an existing bypass, the
  // surviving remainder of that bypass is re-attached behind the new one.
  std::vector<Address> splice_tail;
};

// Scout/onlooker bookkeeping at a node relaying someone else's repair.
// For each prefix length the node relays only the two best-mean copies seen
// (ties to the lexicographically smaller path). Same-length prefixes share
// a denominator, so the mean order is the sum order; keeping a runner-up
// covers the one shape where the next hop has to discard the leader because
// it already sits on that leader's path.
struct RelayedCopy {
  WireAel ael = 0;                // folded through this node
  std::vector<Address> path;      // upstream..this node
};
struct RepairParticipant {
  Address upstream;
  std::uint8_t rreq_id = 0;
  BeePhase phase = BeePhase::Idle;
  std::optional<CandidateLink> best;  // local best, kept for comparison
  std::map<std::uint8_t, std::vector<RelayedCopy>> relayed;  // top copies per prefix length
  SimTime expires = 0;
};

// Collection window state at the second next hop.
struct SnhCopy {
  Address sender;
  std::vector<Address> path;  // upstream..sender
  std::uint8_t hop_count = 0;
  std::uint8_t wl = 0;
};
struct SnhCollector {
  Address upstream;
  std::uint8_t rreq_id = 0;
  Address final_dest;
  bool window_open = true;
  std::vector<SnhCopy> copies;
};

namespace lrabc {

// Engine notification that a data transmission toward failed_next_hop
// exhausted its MAC retries. Opens (or extends) a repair session, or emits a
// RERR when the failed node was the final destination.
Actions detect_link_break(NodeState& node, Address failed_next_hop, const DataPacket& packet,
                          SimTime now);

// pre: session.phase == Idle. Broadcasts the session's Local_RREQ and arms
// the repair timeout.
Actions initiate_local_rreq(RepairSession& session, NodeState& node, SimTime now);

// Local_RREQ at a scout (relay) node or, when this node is the target, at
// the second next hop.
Actions handle_local_rreq(NodeState& node, const Frame& frame, Address sender, SimTime now);

// Second-next-hop half of the above: collects copies inside the reply
// window; exposed separately for tests.
Actions snh_handle_local_rreq(NodeState& node, const Frame& frame, Address sender, SimTime now);

// Local_RREP relay/selection along the reverse path.
Actions handle_local_rrep(NodeState& node, const Frame& frame, Address sender, SimTime now);

// Timer dispatch targets.
Actions on_snh_window_close(NodeState& node, std::uint64_t key, SimTime now);
Actions finalize_repair(NodeState& node, std::uint32_t session_id, SimTime now);
Actions on_participant_expire(NodeState& node, std::uint64_t key, SimTime now);

std::uint64_t flood_key(Address upstream, std::uint8_t rreq_id);

}  // namespace lrabc

}  // namespace sixmesh

#endif  // SIXMESH_LRABC_HPP_
