#include "sixmesh/sim.hpp"

#include <algorithm>
#include <sstream>

namespace sixmesh {

Engine::Engine(const ScenarioConfig& config) : cfg_(config), rng_(config.seed) {
  cfg_.validate();
  if (!cfg_.edges.empty()) {
    std::vector<std::pair<std::uint16_t, std::uint16_t>> edges;
    std::set<std::pair<std::uint16_t, std::uint16_t>> weak;
    for (const auto& e : cfg_.edges) {
      edges.emplace_back(e.a, e.b);
      if (e.weak) weak.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
    }
    topo_ = Topology::from_edges(edges, weak);
    for (std::uint16_t i = 1; i <= cfg_.node_count; ++i) {
      topo_.positions[i];
      topo_.adjacency[i];
    }
    if (!topo_.connected())
      throw DisconnectedTopology("explicit topology is not connected");
  } else {
    TopologySpec spec;
    spec.area_m = cfg_.area_m;
    spec.node_count = cfg_.node_count;
    spec.radio_range_m = cfg_.radio_range_m;
    spec.weak_link_fraction = cfg_.mac.weak_link_fraction;
    spec.seed = cfg_.seed;
    topo_ = build_topology(spec);
  }

  duration_us_ = seconds_to_time(cfg_.sim_duration_s);

  flows_ = cfg_.flows;
  for (auto& flow : flows_) {
    if (flow.farthest) {
      const auto [a, b] = topo_.farthest_pair();
      flow.src = a.value;
      flow.dest = b.value;
      flow.farthest = false;
    }
    if (flow.interval_s <= 0) {
      // spread the flow's packet budget across the remaining run
      const std::uint32_t per_flow = cfg_.flows.empty()
                                         ? cfg_.traffic_total
                                         : cfg_.traffic_total /
                                               static_cast<std::uint32_t>(cfg_.flows.size());
      flow.interval_s = per_flow > 1
                            ? (cfg_.sim_duration_s - flow.start_s) / static_cast<double>(per_flow)
                            : 1.0;
    }
  }

  // Split the traffic budget across flows.
  flow_packets_.assign(flows_.size(), 0);
  if (!flows_.empty()) {
    const std::uint32_t per = cfg_.traffic_total / static_cast<std::uint32_t>(flows_.size());
    std::uint32_t extra = cfg_.traffic_total % static_cast<std::uint32_t>(flows_.size());
    for (auto& n : flow_packets_) {
      n = per + (extra ? 1 : 0);
      if (extra) --extra;
    }
  }

  const ProtocolParams params = cfg_.protocol_params();
  for (const auto& [addr, pos] : topo_.positions) {
    NodeState node;
    node.addr = Address{addr};
    node.params = params;
    node.costs = cfg_.energy;
    double capacity_mah = cfg_.battery_capacity_mah;
    for (const auto& [id, mah] : cfg_.node_batteries)
      if (id == addr) capacity_mah = mah;
    node.battery.capacity = mah_to_energy(capacity_mah);
    node.battery.remaining = node.battery.capacity;
    node.rerr_budget.period = params.rerr_period();
    node.neighbors = topo_.neighbors(Address{addr});
    for (Address n : node.neighbors)
      if (topo_.edge_is_weak(Address{addr}, n)) node.weak_neighbors.insert(n.value);
    nodes_.emplace(addr, std::move(node));
  }
}

void Engine::schedule(Event ev) {
  ev.seq = next_event_seq_++;
  queue_.push(std::move(ev));
}

double Engine::uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

ChargeKind Engine::tx_kind(const Frame& frame) const {
  if (frame.is_data()) return ChargeKind::TxData;
  return is_reply_kind(frame.msg.kind) ? ChargeKind::TxRep : ChargeKind::TxCtl;
}

ChargeKind Engine::rx_kind(const Frame& frame) const {
  if (frame.is_data()) return ChargeKind::RxData;
  return is_reply_kind(frame.msg.kind) ? ChargeKind::RxRep : ChargeKind::RxCtl;
}

void Engine::idle_drain(NodeState& node, SimTime now) {
  if (cfg_.energy.idle_per_second <= 0) return;
  SimTime& last = last_idle_[node.addr.value];
  if (now <= last) return;
  const Energy amount = static_cast<Energy>(
      static_cast<__int128>(cfg_.energy.idle_per_second) * (now - last) / US_PER_SECOND);
  last = now;
  if (amount <= 0) return;
  const Energy drawn = std::min(amount, node.battery.remaining);
  node.battery.remaining -= drawn;
  TraceRecord r;
  r.time = now;
  r.kind = TraceKind::Charge;
  r.node = node.addr;
  r.charge_kind = ChargeKind::Idle;
  r.amount = drawn;
  trace_.append(std::move(r));
  if (node.battery.depleted() && !node.failed) fail_node(node, FailCause::Depleted, now);
}

bool Engine::charge_node(NodeState& node, ChargeKind kind, SimTime now, std::uint64_t cause) {
  idle_drain(node, now);
  if (node.failed) return false;
  ChargeResult result = charge(node.battery, node.costs, kind);
  TraceRecord r;
  r.time = now;
  r.kind = TraceKind::Charge;
  r.node = node.addr;
  r.charge_kind = kind;
  r.amount = result.drawn;
  r.cause_idx = cause;
  trace_.append(std::move(r));
  if (result.depleted) {
    fail_node(node, FailCause::Depleted, now);
    return false;
  }
  return true;
}

void Engine::fail_node(NodeState& node, FailCause cause, SimTime now) {
  if (node.failed) return;
  node.failed = true;
  TraceRecord r;
  r.time = now;
  r.kind = TraceKind::NodeFail;
  r.node = node.addr;
  r.fail_cause = cause;
  trace_.append(std::move(r));
}

int Engine::concurrent_near(Address who, SimTime now, Address exclude) const {
  int count = 0;
  for (const ActiveTx& tx : active_) {
    if (tx.start > now || tx.end <= now) continue;
    if (tx.sender == who || tx.sender == exclude) continue;
    if (topo_.has_edge(tx.sender, who)) ++count;
  }
  return count;
}

int Engine::hidden_near(Address receiver, Address sender, SimTime now) const {
  // Carrier sensing serializes transmitters the sender can hear; collisions
  // at the receiver come from the ones it cannot (hidden terminals).
  int count = 0;
  for (const ActiveTx& tx : active_) {
    if (tx.start > now || tx.end <= now) continue;
    if (tx.sender == receiver || tx.sender == sender) continue;
    if (topo_.has_edge(tx.sender, receiver) && !topo_.has_edge(tx.sender, sender)) ++count;
  }
  return count;
}

SimTime Engine::broadcast_delay(Address sender, SimTime now) {
  const int c = concurrent_near(sender, now, sender);
  const double factor = 1.0 + cfg_.mac.contention_factor * static_cast<double>(c);
  const SimTime base = seconds_to_time(cfg_.mac.per_hop_delay_s);
  return static_cast<SimTime>(static_cast<double>(base) * factor);
}

bool Engine::reception_lost(Address receiver, Address sender, SimTime now) {
  if (cfg_.mac.loss_per_concurrent <= 0) return false;
  const int c = hidden_near(receiver, sender, now);
  const double p =
      std::min(cfg_.mac.loss_cap, cfg_.mac.loss_per_concurrent * static_cast<double>(c));
  if (p <= 0) return false;
  return uniform01() < p;
}

std::uint64_t Engine::trace_transmit(Address sender, Address to, const Frame& frame,
                                     bool broadcast, std::uint32_t attempt, SimTime now,
                                     std::uint64_t cause) {
  TraceRecord r;
  r.time = now;
  r.kind = TraceKind::Transmit;
  r.node = sender;
  r.peer = to;
  r.has_msg = true;
  r.msg = frame.msg;
  r.broadcast = broadcast;
  r.attempt = static_cast<std::uint8_t>(attempt);
  r.cause_idx = cause;
  if (frame.is_data()) {
    r.has_pkt = true;
    r.flow = frame.data->flow;
    r.pkt_seq = frame.data->seq;
  } else if (!frame.relay_path.empty()) {
    r.path = frame.relay_path;
  }
  TraceRecord& stored = trace_.append(std::move(r));
  stored.tx_id = stored.idx;
  return stored.idx;
}

void Engine::do_broadcast(Address sender, const Frame& frame, SimTime now, std::uint64_t cause) {
  NodeState& node = nodes_.at(sender.value);
  if (node.failed) return;
  if (!charge_node(node, tx_kind(frame), now, cause)) return;

  const SimTime delay = broadcast_delay(sender, now);
  const std::uint64_t tx_idx = trace_transmit(sender, NULL_ADDRESS, frame, true, 1, now, cause);
  active_.push_back(ActiveTx{now, now + delay, sender});
  if (active_.size() > 512) {
    std::erase_if(active_, [now](const ActiveTx& t) { return t.end <= now; });
  }

  for (Address neighbor : topo_.neighbors(sender)) {
    const NodeState& peer = nodes_.at(neighbor.value);
    if (peer.failed) continue;
    if (reception_lost(neighbor, sender, now)) {
      TraceRecord drop;
      drop.time = now;
      drop.kind = TraceKind::DropMsg;
      drop.node = neighbor;
      drop.peer = sender;
      drop.has_msg = true;
      drop.msg = frame.msg;
      drop.drop_reason = DropReason::Loss;
      drop.cause_idx = tx_idx;
      trace_.append(std::move(drop));
      continue;
    }
    Event ev;
    ev.time = now + delay;
    ev.kind = EventKind::Receive;
    ev.node = neighbor;
    ev.peer = sender;
    ev.frame = frame;
    ev.tx_record = tx_idx;
    schedule(std::move(ev));
  }
}

void Engine::do_unicast_attempt(Address sender, Address to, const Frame& frame,
                                std::uint32_t attempt, SimTime now, std::uint64_t cause) {
  NodeState& node = nodes_.at(sender.value);
  if (node.failed) return;

  if (attempt > cfg_.mac.retry_limit + 1) {
    // Retries exhausted: a broken link from the sender's point of view.
    if (frame.is_data()) {
      Actions actions = routing::link_break(node, to, frame, now);
      execute_actions(sender, actions, now, cause);
    } else {
      TraceRecord drop;
      drop.time = now;
      drop.kind = TraceKind::DropMsg;
      drop.node = sender;
      drop.peer = to;
      drop.has_msg = true;
      drop.msg = frame.msg;
      drop.drop_reason = DropReason::LinkLoss;
      drop.cause_idx = cause;
      trace_.append(std::move(drop));
    }
    return;
  }

  if (!charge_node(node, tx_kind(frame), now, cause)) return;
  const SimTime delay = broadcast_delay(sender, now);
  const std::uint64_t tx_idx = trace_transmit(sender, to, frame, false, attempt, now, cause);
  active_.push_back(ActiveTx{now, now + delay, sender});

  const NodeState& peer = nodes_.at(to.value);
  const bool reachable = topo_.has_edge(sender, to) && !peer.failed;
  const bool lost = !reachable || reception_lost(to, sender, now);
  if (!lost) {
    Event ev;
    ev.time = now + delay;
    ev.kind = EventKind::Receive;
    ev.node = to;
    ev.peer = sender;
    ev.frame = frame;
    ev.tx_record = tx_idx;
    schedule(std::move(ev));
    return;
  }

  Event retry;
  retry.time = now + delay;
  retry.kind = EventKind::Attempt;
  retry.node = sender;
  retry.peer = to;
  retry.frame = frame;
  retry.attempt = attempt + 1;
  retry.cause = cause;
  schedule(std::move(retry));
}

void Engine::execute_actions(Address node_addr, const Actions& actions, SimTime now,
                             std::uint64_t cause) {
  for (const NodeAction& action : actions) {
    if (const auto* a = std::get_if<ActionBroadcast>(&action)) {
      do_broadcast(node_addr, a->frame, now, cause);
    } else if (const auto* a = std::get_if<ActionUnicast>(&action)) {
      do_unicast_attempt(node_addr, a->to, a->frame, 1, now, cause);
    } else if (const auto* a = std::get_if<ActionDeliver>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::Deliver;
      r.node = node_addr;
      r.has_pkt = true;
      r.flow = a->pkt.flow;
      r.pkt_seq = a->pkt.seq;
      r.t_ref = a->pkt.sent_at;
      r.cause_idx = cause;
      trace_.append(std::move(r));
      outstanding_.erase({a->pkt.flow, a->pkt.seq});
    } else if (const auto* a = std::get_if<ActionEnqueue>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::Enqueue;
      r.node = node_addr;
      r.has_pkt = true;
      r.flow = a->pkt.flow;
      r.pkt_seq = a->pkt.seq;
      r.cause_idx = cause;
      trace_.append(std::move(r));
    } else if (const auto* a = std::get_if<ActionDrop>(&action)) {
      TraceRecord r;
      r.time = now;
      r.node = node_addr;
      r.drop_reason = a->reason;
      r.cause_idx = cause;
      if (a->pkt) {
        r.kind = TraceKind::DropPkt;
        r.has_pkt = true;
        r.flow = a->pkt->flow;
        r.pkt_seq = a->pkt->seq;
        outstanding_.erase({a->pkt->flow, a->pkt->seq});
      } else {
        r.kind = TraceKind::DropMsg;
        if (a->msg) {
          r.has_msg = true;
          r.msg = *a->msg;
        }
      }
      trace_.append(std::move(r));
    } else if (const auto* a = std::get_if<ActionStartTimer>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::TimerSet;
      r.node = node_addr;
      r.timer_kind = a->kind;
      r.timer_key = a->key;
      r.cause_idx = cause;
      trace_.append(std::move(r));
      Event ev;
      ev.time = now + a->delay;
      ev.kind = EventKind::Timer;
      ev.node = node_addr;
      ev.timer_kind = a->kind;
      ev.timer_key = a->key;
      schedule(std::move(ev));
    } else if (const auto* a = std::get_if<ActionPhaseShift>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::PhaseShift;
      r.node = node_addr;
      r.peer = a->upstream;
      r.msg.rreq_id = a->rreq_id;
      r.phase_from = a->from;
      r.phase_to = a->to;
      r.cause_idx = cause;
      trace_.append(std::move(r));
    } else if (const auto* a = std::get_if<ActionSessionOpen>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::SessionOpen;
      r.node = node_addr;
      r.session_id = a->session_id;
      r.peer = a->abandoned;
      r.msg.second_next_hop = a->second_next_hop;
      r.msg.dest = a->final_dest;
      r.cause_idx = cause;
      trace_.append(std::move(r));
    } else if (const auto* a = std::get_if<ActionSessionClose>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::SessionClose;
      r.node = node_addr;
      r.session_id = a->session_id;
      r.outcome = a->outcome;
      r.peer = a->abandoned;
      r.path = a->path;
      r.count = a->participants;
      if (a->best_rrep_id) {
        r.has_msg = true;
        r.msg.rrep_id = *a->best_rrep_id;
        r.msg.ael = a->best_ael;
        r.msg.hop_count = a->best_hops;
        r.msg.weak_links_wl = a->best_wl;
        r.msg.dest = a->best_next_hop;
      }
      // trial request ids ride in the note
      std::ostringstream ids;
      for (std::size_t i = 0; i < a->trial_rreq_ids.size(); ++i) {
        if (i) ids << ',';
        ids << static_cast<int>(a->trial_rreq_ids[i]);
      }
      r.note = "trials=" + ids.str();
      r.cause_idx = cause;
      trace_.append(std::move(r));
    } else if (const auto* a = std::get_if<ActionCandidateUpdate>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::CandidateUpdate;
      r.node = node_addr;
      r.session_id = a->session_id;
      r.has_msg = true;
      r.msg.ael = a->ael;
      r.msg.hop_count = a->hops;
      r.msg.weak_links_wl = a->wl;
      r.msg.dest = a->next_hop;
      r.cause_idx = cause;
      trace_.append(std::move(r));
    } else if (const auto* a = std::get_if<ActionRouteUpdate>(&action)) {
      TraceRecord r;
      r.time = now;
      r.kind = TraceKind::RouteUpdate;
      r.node = node_addr;
      r.peer = a->next_hop;
      r.msg.dest = a->dest;
      r.msg.hop_count = a->hop_count;
      r.weak = a->patched;
      r.cause_idx = cause;
      trace_.append(std::move(r));
    }
  }
}

void Engine::emit_run_header() {
  {
    TraceRecord r;
    r.kind = TraceKind::RunInfo;
    std::ostringstream note;
    note << "proto=" << protocol_name(cfg_.protocol) << ";seed=" << cfg_.seed
         << ";nodes=" << cfg_.node_count << ";ttl=" << static_cast<int>(cfg_.local_ttl)
         << ";hop_limit=" << static_cast<int>(cfg_.hop_limit)
         << ";delay_us=" << seconds_to_time(cfg_.mac.per_hop_delay_s)
         << ";rerr_period_us=" << cfg_.protocol_params().rerr_period()
         << ";duration_us=" << duration_us_ << ";traffic=" << cfg_.traffic_total
         << ";packet_bytes=" << cfg_.packet_size_bytes;
    for (std::size_t i = 0; i < flows_.size(); ++i)
      note << ";flow" << i << "=" << flows_[i].src << ">" << flows_[i].dest;
    r.note = note.str();
    trace_.append(std::move(r));
  }
  for (const auto& [addr, node] : nodes_) {
    TraceRecord r;
    r.kind = TraceKind::TopoNode;
    r.node = Address{addr};
    r.amount = node.battery.capacity;
    trace_.append(std::move(r));
  }
  for (const auto& [addr, adj] : topo_.adjacency) {
    for (Address peer : adj) {
      if (peer.value <= addr) continue;
      TraceRecord r;
      r.kind = TraceKind::TopoEdge;
      r.node = Address{addr};
      r.peer = peer;
      r.weak = topo_.edge_is_weak(Address{addr}, peer);
      trace_.append(std::move(r));
    }
  }
}

std::vector<Address> Engine::walk_current_route(Address src, Address dest) const {
  std::vector<Address> route{src};
  std::set<std::uint16_t> seen{src.value};
  Address at = src;
  for (int guard = 0; guard < 64 && !(at == dest); ++guard) {
    const NodeState& node = nodes_.at(at.value);
    auto it = node.routes.find(dest.value);
    if (it == node.routes.end() || !it->second.valid) return {};
    const RoutingEntry& entry = it->second;
    if (!entry.repair_path.empty() && entry.repair_path.front() == at) {
      for (std::size_t i = 1; i < entry.repair_path.size(); ++i) {
        const Address hop = entry.repair_path[i];
        if (!seen.insert(hop.value).second) return {};
        route.push_back(hop);
        if (hop == dest) return route;
      }
      at = entry.repair_path.back();
      continue;
    }
    const Address hop = entry.next_hop;
    if (!seen.insert(hop.value).second) return {};
    route.push_back(hop);
    at = hop;
  }
  return at == dest ? route : std::vector<Address>{};
}

void Engine::process_auto_fail(SimTime now) {
  if (flows_.empty()) return;
  const Address src{flows_[0].src};
  const Address dest{flows_[0].dest};
  const std::vector<Address> route = walk_current_route(src, dest);
  if (route.size() < 3) return;  // no intermediate forwarder to fail

  auto already_failed = [&](Address a) { return nodes_.at(a.value).failed; };
  auto eligible = [&](Address v) {
    if (v == src || v == dest || already_failed(v)) return false;
    const auto alive = [&](Address a) { return !(a == v) && !already_failed(a); };
    return topo_.hop_distance_if(src, dest, alive) >= 0;
  };

  // Middle-out over the current forwarder chain.
  const int mid = static_cast<int>(route.size()) / 2;
  for (int offset = 0; offset < static_cast<int>(route.size()); ++offset) {
    for (const int idx : {mid - offset, mid + offset}) {
      if (idx < 1 || idx + 1 >= static_cast<int>(route.size())) continue;
      const Address victim = route[static_cast<std::size_t>(idx)];
      if (!eligible(victim)) continue;
      fail_node(nodes_.at(victim.value), FailCause::Scheduled, now);
      realized_failures_.push_back(FailureSpec{victim.value, time_to_seconds(now)});
      return;
    }
  }
}

void Engine::process(const Event& ev) {
  switch (ev.kind) {
    case EventKind::NodeFail: {
      fail_node(nodes_.at(ev.node.value), FailCause::Scheduled, ev.time);
      return;
    }
    case EventKind::AutoFail: {
      process_auto_fail(ev.time);
      return;
    }
    case EventKind::Receive: {
      NodeState& node = nodes_.at(ev.node.value);
      if (node.failed) return;  // the dead neither send nor receive
      if (!charge_node(node, rx_kind(ev.frame), ev.time, ev.tx_record)) return;
      TraceRecord r;
      r.time = ev.time;
      r.kind = TraceKind::Receive;
      r.node = ev.node;
      r.peer = ev.peer;
      r.has_msg = true;
      r.msg = ev.frame.msg;
      r.tx_id = ev.tx_record;
      r.cause_idx = ev.tx_record;
      if (ev.frame.is_data()) {
        r.has_pkt = true;
        r.flow = ev.frame.data->flow;
        r.pkt_seq = ev.frame.data->seq;
      }
      const std::uint64_t rx_idx = trace_.append(std::move(r)).idx;
      Actions actions = routing::handle_frame(node, ev.frame, ev.peer, ev.time);
      execute_actions(ev.node, actions, ev.time, rx_idx);
      return;
    }
    case EventKind::AppSend: {
      NodeState& node = nodes_.at(ev.node.value);
      DataPacket pkt;
      pkt.flow = ev.flow;
      pkt.seq = ev.pkt_seq;
      pkt.src = ev.node;
      pkt.dest = ev.peer;
      pkt.size_bytes = cfg_.packet_size_bytes;
      pkt.sent_at = ev.time;
      TraceRecord r;
      r.time = ev.time;
      r.kind = TraceKind::AppSend;
      r.node = ev.node;
      r.peer = ev.peer;
      r.has_pkt = true;
      r.flow = pkt.flow;
      r.pkt_seq = pkt.seq;
      const std::uint64_t idx = trace_.append(std::move(r)).idx;
      outstanding_.insert({pkt.flow, pkt.seq});
      if (node.failed) {
        TraceRecord drop;
        drop.time = ev.time;
        drop.kind = TraceKind::DropPkt;
        drop.node = ev.node;
        drop.has_pkt = true;
        drop.flow = pkt.flow;
        drop.pkt_seq = pkt.seq;
        drop.drop_reason = DropReason::NoRoute;
        drop.cause_idx = idx;
        trace_.append(std::move(drop));
        outstanding_.erase({pkt.flow, pkt.seq});
        return;
      }
      Actions actions = routing::app_send(node, pkt, ev.time);
      execute_actions(ev.node, actions, ev.time, idx);
      return;
    }
    case EventKind::Attempt: {
      do_unicast_attempt(ev.node, ev.peer, ev.frame, ev.attempt, ev.time, ev.cause);
      return;
    }
    case EventKind::Timer: {
      NodeState& node = nodes_.at(ev.node.value);
      if (node.failed) return;
      TraceRecord r;
      r.time = ev.time;
      r.kind = TraceKind::TimerFire;
      r.node = ev.node;
      r.timer_kind = ev.timer_kind;
      r.timer_key = ev.timer_key;
      const std::uint64_t idx = trace_.append(std::move(r)).idx;
      Actions actions = routing::handle_timer(node, ev.timer_kind, ev.timer_key, ev.time);
      execute_actions(ev.node, actions, ev.time, idx);
      return;
    }
  }
}

EventTrace Engine::run() {
  if (ran_) throw std::logic_error("Engine::run is single use");
  ran_ = true;

  emit_run_header();

  for (const auto& failure : cfg_.failures) {
    Event ev;
    ev.time = seconds_to_time(failure.time_s);
    ev.kind = EventKind::NodeFail;
    ev.node = Address{failure.node};
    schedule(std::move(ev));
  }
  if (cfg_.auto_failures > 0 && !flows_.empty()) {
    // Probe mode: break the flow's current route at spread instants; the
    // realized (node, time) schedule replays as static failures.
    const FlowSpec& flow = flows_[0];
    const std::uint32_t per_flow =
        cfg_.traffic_total / static_cast<std::uint32_t>(flows_.size());
    const double window_end =
        per_flow > 1 ? flow.start_s + flow.interval_s * (per_flow - 1) : cfg_.sim_duration_s;
    const double span = std::max(window_end - flow.start_s, 0.0);
    for (std::uint32_t k = 0; k < cfg_.auto_failures; ++k) {
      const double frac =
          static_cast<double>(k + 1) / (static_cast<double>(cfg_.auto_failures) + 1.0);
      Event ev;
      ev.time = seconds_to_time(flow.start_s + frac * span);
      ev.kind = EventKind::AutoFail;
      schedule(std::move(ev));
    }
  }
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    const FlowSpec& flow = flows_[i];
    for (std::uint32_t k = 0; k < flow_packets_[i]; ++k) {
      Event ev;
      ev.time = seconds_to_time(flow.start_s) +
                static_cast<SimTime>(k) * seconds_to_time(flow.interval_s);
      if (ev.time > duration_us_) break;
      ev.kind = EventKind::AppSend;
      ev.node = Address{flow.src};
      ev.peer = Address{flow.dest};
      ev.flow = static_cast<std::uint32_t>(i);
      ev.pkt_seq = k;
      schedule(std::move(ev));
    }
  }

  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    if (ev.time > duration_us_) break;
    process(ev);
  }

  for (const auto& [flow, seq] : outstanding_) {
    TraceRecord r;
    r.time = duration_us_;
    r.kind = TraceKind::InFlightAtEnd;
    r.has_pkt = true;
    r.flow = flow;
    r.pkt_seq = seq;
    trace_.append(std::move(r));
  }
  for (auto& [addr, node] : nodes_) {
    idle_drain(node, duration_us_);
    TraceRecord r;
    r.time = duration_us_;
    r.kind = TraceKind::NodeSummary;
    r.node = Address{addr};
    r.amount = node.battery.remaining;
    trace_.append(std::move(r));
  }
  return trace_;
}

EventTrace run_scenario(const ScenarioConfig& config) {
  Engine engine(config);
  return engine.run();
}

}  // namespace sixmesh
