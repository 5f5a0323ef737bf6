// Append-only event trace: the assertion substrate for every protocol
// invariant and the source every metric is computed from. Exports to a
// newline-delimited text form that parses back losslessly.
#ifndef SIXMESH_TRACE_HPP_
#define SIXMESH_TRACE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sixmesh/energy.hpp"
#include "sixmesh/types.hpp"

namespace sixmesh {

enum class TraceKind : std::uint8_t {
  RunInfo,      // run parameters needed by standalone validation
  TopoNode,     // node roster entry (with initial battery)
  TopoEdge,     // undirected edge, weak flag
  AppSend,
  Transmit,
  Receive,
  Deliver,
  DropPkt,
  DropMsg,
  Enqueue,
  TimerSet,
  TimerFire,
  NodeFail,
  Charge,
  PhaseShift,
  SessionOpen,
  SessionClose,
  CandidateUpdate,
  RouteUpdate,
  InFlightAtEnd,
  NodeSummary,  // final battery level, for exact conservation checks
};

const char* trace_kind_name(TraceKind k);

enum class FailCause : std::uint8_t { Scheduled, Depleted };

// One flat record; which fields are meaningful depends on kind. Flat keeps
// the text form trivial and the validator free of variant plumbing.
struct TraceRecord {
  SimTime time = 0;
  std::uint64_t idx = 0;  // position in the trace, assigned on append
  TraceKind kind = TraceKind::RunInfo;
  Address node;  // acting node
  Address peer;  // unicast target / reception source / edge endpoint

  bool has_msg = false;
  ControlMessage msg;

  bool has_pkt = false;
  std::uint32_t flow = 0;
  std::uint32_t pkt_seq = 0;

  std::uint64_t tx_id = 0;     // Transmit: own id; Receive: the heard transmission
  std::uint64_t cause_idx = 0; // record index that triggered this one (0 = none)
  std::uint32_t session_id = 0;
  std::uint8_t attempt = 0;    // unicast attempt ordinal, 1-based
  bool broadcast = false;

  DropReason drop_reason = DropReason::None;
  TimerKind timer_kind = TimerKind::DiscoveryTimeout;
  std::uint64_t timer_key = 0;
  FailCause fail_cause = FailCause::Scheduled;
  ChargeKind charge_kind = ChargeKind::Idle;
  Energy amount = 0;

  BeePhase phase_from = BeePhase::Idle;
  BeePhase phase_to = BeePhase::Idle;
  SessionOutcome outcome = SessionOutcome::Failed;

  SimTime t_ref = 0;           // Deliver: application send time
  bool weak = false;           // TopoEdge
  std::uint32_t count = 0;     // SessionClose: participant count
  std::vector<Address> path;
  std::string note;            // RunInfo: key=value blob; free-form otherwise
};

class EventTrace {
 public:
  TraceRecord& append(TraceRecord r);

  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const TraceRecord& operator[](std::size_t i) const { return records_[i]; }

  void write_text(std::ostream& out) const;
  std::string to_text() const;

  // Parses a previously exported trace. Throws std::runtime_error on
  // malformed input.
  static EventTrace from_text(const std::string& text);

 private:
  std::vector<TraceRecord> records_;
};

}  // namespace sixmesh

#endif  // SIXMESH_TRACE_HPP_
