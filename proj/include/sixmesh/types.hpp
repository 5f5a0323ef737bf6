// Shared domain types: data packets, in-flight frames, protocol selection,
// bee phases, action/drop/timer enums.
#ifndef SIXMESH_TYPES_HPP_
#define SIXMESH_TYPES_HPP_

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "sixmesh/wire.hpp"

namespace sixmesh {

enum class Protocol : std::uint8_t { LOAD, LRABC };

const char* protocol_name(Protocol p);

struct DataPacket {
  std::uint32_t flow = 0;
  std::uint32_t seq = 0;
  Address src;
  Address dest;
  std::uint16_t size_bytes = 0;
  SimTime sent_at = 0;  // application send time

  friend bool operator==(const DataPacket&, const DataPacket&) = default;
};

// An in-flight frame. The 14-octet header is the wire contract; relay_path
// is engine-side bookkeeping a deployed implementation would carry in a
// hop-by-hop option: the node sequence a local-repair request has traversed,
// or the full reverse source route a local-repair reply retraces.
struct Frame {
  ControlMessage msg;
  std::optional<DataPacket> data;        // present iff msg.kind == Data
  std::vector<Address> relay_path;       // LocalRREQ: origin..current sender
                                         // LocalRREP: candidate path upstream..snh
  std::size_t route_index = 0;           // LocalRREP: holder's position in relay_path

  bool is_data() const { return data.has_value(); }
};

// Repair roles mapped onto foraging phases. Transitions: Idle->Scout when a
// node broadcasts a Local_RREQ, Scout->Employed when it receives a
// Local_RREP, Employed->Scout when a fresh Local_RREQ arrives, any->Idle
// when the session ends.
enum class BeePhase : std::uint8_t { Idle, Scout, Employed, Onlooker };

const char* bee_phase_name(BeePhase p);
bool bee_phase_transition_allowed(BeePhase from, BeePhase to);

enum class DropReason : std::uint8_t {
  None = 0,
  HopLimit,
  Duplicate,
  NoReverseRoute,
  NoRoute,
  LocalTtl,
  WorseCandidate,
  NoSession,
  RepairFailed,
  BufferOverflow,
  Loss,          // reception lost to contention
  LinkLoss,      // unicast retries exhausted on a control frame
  WindowClosed,  // repair-request copy after the collection window
  NodeUnreachable,
  EndOfSim,
};

const char* drop_reason_name(DropReason r);

enum class TimerKind : std::uint8_t {
  DiscoveryTimeout,
  RepairTimeout,
  SnhWindow,
  LoadRepairDeadline,
  ParticipantExpire,
};

const char* timer_kind_name(TimerKind k);

enum class SessionOutcome : std::uint8_t { Success, Failed };

// Actions a node transition hands back to the engine. Enqueue/Drop and the
// session/phase actions exist so every externally observable step lands in
// the event trace; queue contents themselves live in the node state.
struct ActionBroadcast {
  Frame frame;
};
struct ActionUnicast {
  Address to;
  Frame frame;
};
struct ActionDeliver {
  DataPacket pkt;
};
struct ActionEnqueue {
  DataPacket pkt;
};
struct ActionDrop {
  DropReason reason = DropReason::None;
  std::optional<DataPacket> pkt;
  std::optional<ControlMessage> msg;
};
struct ActionStartTimer {
  TimerKind kind = TimerKind::DiscoveryTimeout;
  std::uint64_t key = 0;
  SimTime delay = 0;
};
struct ActionPhaseShift {
  Address upstream;
  std::uint8_t rreq_id = 0;
  BeePhase from = BeePhase::Idle;
  BeePhase to = BeePhase::Idle;
};
struct ActionSessionOpen {
  std::uint32_t session_id = 0;
  Address abandoned;
  Address second_next_hop;
  Address final_dest;
};
struct ActionSessionClose {
  std::uint32_t session_id = 0;
  SessionOutcome outcome = SessionOutcome::Failed;
  std::optional<std::uint8_t> best_rrep_id;
  WireAel best_ael = 0;
  std::uint8_t best_hops = 0;
  std::uint8_t best_wl = 0;
  Address best_next_hop;
  std::vector<Address> path;               // winning candidate path
  std::vector<std::uint8_t> trial_rreq_ids;
  Address upstream;
  Address abandoned;
  std::uint32_t participants = 0;  // emergent colony size
};
struct ActionCandidateUpdate {
  std::uint32_t session_id = 0;
  WireAel ael = 0;
  std::uint8_t hops = 0;
  std::uint8_t wl = 0;
  Address next_hop;
};
struct ActionRouteUpdate {
  Address dest;
  Address next_hop;
  std::uint8_t hop_count = 0;
  bool patched = false;  // true when a repair rewrote an existing entry
};

using NodeAction =
    std::variant<ActionBroadcast, ActionUnicast, ActionDeliver, ActionEnqueue, ActionDrop,
                 ActionStartTimer, ActionPhaseShift, ActionSessionOpen, ActionSessionClose,
                 ActionCandidateUpdate, ActionRouteUpdate>;

using Actions = std::vector<NodeAction>;

}  // namespace sixmesh

#endif  // SIXMESH_TYPES_HPP_
