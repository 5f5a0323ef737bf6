// Deterministic discrete-event executor: realizes NodeActions over an
// abstract MAC (per-hop delay, contention, retries, reception loss), injects
// scheduled node failures, drives CBR traffic, and records everything into
// an EventTrace. A run is a pure function of its ScenarioConfig.
#ifndef SIXMESH_SIM_HPP_
#define SIXMESH_SIM_HPP_

#include <cstdint>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "sixmesh/config.hpp"
#include "sixmesh/node_state.hpp"
#include "sixmesh/routing.hpp"
#include "sixmesh/topology.hpp"
#include "sixmesh/trace.hpp"

namespace sixmesh {

class Engine {
 public:
  // Builds the topology (throws DisconnectedTopology after the retry bound)
  // and resolves `farthest` flow endpoints.
  explicit Engine(const ScenarioConfig& config);

  // Executes the scenario to completion. Single use.
  EventTrace run();

  const Topology& topology() const { return topo_; }
  const std::vector<FlowSpec>& resolved_flows() const { return flows_; }
  const NodeState& node(Address a) const { return nodes_.at(a.value); }

  // Failures the auto-failure probe realized (node, time), for replay as a
  // static schedule.
  const std::vector<FailureSpec>& realized_failures() const { return realized_failures_; }

 private:
  enum class EventKind : std::uint8_t {
    NodeFail = 0,
    Receive = 1,
    AppSend = 2,
    Attempt = 3,
    Timer = 4,
    AutoFail = 5,
  };

  struct Event {
    SimTime time = 0;
    EventKind kind = EventKind::Timer;
    std::uint64_t seq = 0;
    Address node;       // failing node / receiver / sender / timer owner
    Address peer;       // Receive: transmitter; Attempt: unicast target
    Frame frame;
    std::uint64_t tx_record = 0;   // Receive: transmit record index
    std::uint32_t attempt = 0;     // Attempt ordinal, 1-based
    std::uint64_t cause = 0;       // provoking trace record
    TimerKind timer_kind = TimerKind::DiscoveryTimeout;
    std::uint64_t timer_key = 0;
    std::uint32_t flow = 0;        // AppSend
    std::uint32_t pkt_seq = 0;
  };

  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.kind != b.kind) return static_cast<int>(a.kind) > static_cast<int>(b.kind);
      return a.seq > b.seq;
    }
  };

  struct ActiveTx {
    SimTime start = 0;
    SimTime end = 0;
    Address sender;
  };

  void schedule(Event ev);
  void emit_run_header();
  void process(const Event& ev);
  void process_auto_fail(SimTime now);
  std::vector<Address> walk_current_route(Address src, Address dest) const;
  void execute_actions(Address node, const Actions& actions, SimTime now, std::uint64_t cause);
  void do_broadcast(Address sender, const Frame& frame, SimTime now, std::uint64_t cause);
  void do_unicast_attempt(Address sender, Address to, const Frame& frame, std::uint32_t attempt,
                          SimTime now, std::uint64_t cause);
  bool charge_node(NodeState& node, ChargeKind kind, SimTime now, std::uint64_t cause);
  void idle_drain(NodeState& node, SimTime now);
  void fail_node(NodeState& node, FailCause cause, SimTime now);
  SimTime broadcast_delay(Address sender, SimTime now);
  int concurrent_near(Address who, SimTime now, Address exclude) const;
  int hidden_near(Address receiver, Address sender, SimTime now) const;
  bool reception_lost(Address receiver, Address sender, SimTime now);
  double uniform01();
  ChargeKind tx_kind(const Frame& frame) const;
  ChargeKind rx_kind(const Frame& frame) const;
  std::uint64_t trace_transmit(Address sender, Address to, const Frame& frame, bool broadcast,
                               std::uint32_t attempt, SimTime now, std::uint64_t cause);

  ScenarioConfig cfg_;
  Topology topo_;
  std::vector<FlowSpec> flows_;
  std::vector<std::uint32_t> flow_packets_;
  std::map<std::uint16_t, NodeState> nodes_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::uint64_t next_event_seq_ = 0;
  std::vector<ActiveTx> active_;
  EventTrace trace_;
  std::mt19937_64 rng_;
  std::set<std::pair<std::uint32_t, std::uint32_t>> outstanding_;  // (flow, seq)
  std::map<std::uint16_t, SimTime> last_idle_;
  std::vector<FailureSpec> realized_failures_;
  SimTime duration_us_ = 0;
  bool ran_ = false;
};

// Convenience wrapper.
EventTrace run_scenario(const ScenarioConfig& config);

}  // namespace sixmesh

#endif  // SIXMESH_SIM_HPP_
