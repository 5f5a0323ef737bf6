// Per-node protocol state. Owned by the engine; mutated only through the
// transition functions in routing.hpp / lrabc.hpp / load.hpp.
#ifndef SIXMESH_NODE_STATE_HPP_
#define SIXMESH_NODE_STATE_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <vector>

#include "sixmesh/energy.hpp"
#include "sixmesh/lrabc.hpp"
#include "sixmesh/load.hpp"
#include "sixmesh/types.hpp"

namespace sixmesh {

// Tunables shared by every node in a run. Defaults follow the protocol
// constants; everything is overridable from the scenario config.
struct ProtocolParams {
  Protocol protocol = Protocol::LRABC;
  std::uint8_t hop_limit = 31;          // 5-bit field ceiling
  std::uint8_t local_ttl = 3;           // repair-request dissemination bound
  std::uint32_t trial_limit = 2;        // repair attempts per session
  SimTime per_hop_delay = 10'000;       // 10 ms
  SimTime route_lifetime = 30 * US_PER_SECOND;
  double rerr_rate_per_s = 1.0;
  std::uint32_t buffer_capacity = 32;   // queued/buffered data packets per queue

  SimTime discovery_timeout() const { return 2 * SimTime{hop_limit} * per_hop_delay; }
  SimTime repair_window() const { return 4 * per_hop_delay * SimTime{local_ttl}; }
  SimTime snh_window() const { return per_hop_delay; }
  SimTime load_repair_deadline() const { return 2 * SimTime{hop_limit} * per_hop_delay; }
  SimTime participant_ttl() const { return 2 * repair_window(); }
  SimTime rerr_period() const {
    return static_cast<SimTime>(static_cast<double>(US_PER_SECOND) / rerr_rate_per_s);
  }
};

struct RoutingEntry {
  Address dest;
  Address next_hop;
  Address second_next_hop;  // hop after next_hop; null when unknown or next_hop == dest
  std::uint8_t hop_count = 0;
  std::uint8_t weak_links = 0;
  WireAel path_ael = 0;  // mean residual energy along the path, as learned
  SimTime lifetime_expiry = 0;
  std::vector<Address> precursors;  // downstream neighbours relaying through us
  // When a local repair patched this entry, the bypass acts as one virtual
  // link: data is relayed along this recorded path up to the second next
  // hop, where table forwarding resumes.
  std::vector<Address> repair_path;
  bool valid = false;

  void add_precursor(Address a) {
    for (Address p : precursors)
      if (p == a) return;
    precursors.push_back(a);
  }
};

// Duplicate-suppression record for one flood, keyed by (originator, rreq_id).
// best_* hold the best cost seen so far, compared as received.
struct RouteRequestRecord {
  Address originator;
  std::uint8_t rreq_id = 0;
  SimTime first_seen = 0;
  std::uint8_t best_hop_count = 0;
  std::uint8_t best_wl = 0;
  WireAel best_ael = 0;
};

// Awaiting-discovery state for one destination.
struct PendingDiscovery {
  Address dest;
  std::deque<DataPacket> queue;
  std::uint32_t attempts = 0;
  std::uint8_t rreq_id = 0;  // id of the outstanding request
};

struct NodeState {
  Address addr;
  ProtocolParams params;
  EnergyCosts costs;
  Battery battery;
  bool failed = false;

  // filled by the engine from the topology
  std::vector<Address> neighbors;
  std::set<std::uint16_t> weak_neighbors;  // neighbours reached over a weak link

  std::map<std::uint16_t, RoutingEntry> routes;
  std::map<std::pair<std::uint16_t, std::uint8_t>, RouteRequestRecord> rreq_seen;
  std::map<std::uint16_t, PendingDiscovery> pending;
  std::uint8_t next_rreq_id = 0;
  std::uint8_t next_rrep_id = 0;

  // local repair
  std::uint32_t next_session_seq = 0;
  std::map<std::uint32_t, RepairSession> repair_sessions;
  std::map<std::uint64_t, RepairParticipant> participants;   // by flood key
  std::map<std::uint64_t, SnhCollector> snh_collectors;      // by flood key
  std::set<std::uint64_t> closed_snh_windows;
  std::map<std::uint32_t, LoadRepairSession> load_sessions;
  RerrBudget rerr_budget;

  WireAel energy_level() const { return energy_to_wire_ael(battery.remaining); }
  bool link_is_weak(Address neighbor) const {
    return weak_neighbors.count(neighbor.value) != 0;
  }
  std::uint8_t fresh_rreq_id() { return next_rreq_id++; }
  std::uint8_t fresh_rrep_id() { return next_rrep_id++; }
  std::uint32_t fresh_session_id() {
    return (static_cast<std::uint32_t>(addr.value) << 16) | (++next_session_seq & 0xFFFF);
  }
};

}  // namespace sixmesh

#endif  // SIXMESH_NODE_STATE_HPP_
