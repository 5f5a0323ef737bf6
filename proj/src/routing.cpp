#include "sixmesh/routing.hpp"

#include <algorithm>

namespace sixmesh::routing {

namespace {

// Route cost under CT=0: hop count primary, weak links secondary.
struct Cost {
  std::uint8_t hops;
  std::uint8_t wl;

  friend bool operator<(Cost a, Cost b) {
    return a.hops != b.hops ? a.hops < b.hops : a.wl < b.wl;
  }
  friend bool operator==(Cost a, Cost b) { return a.hops == b.hops && a.wl == b.wl; }
};

// A duplicate is re-processed only on strictly lower cost, or equal cost
// with strictly higher path energy.
bool better_than_record(Cost cost, WireAel ael, const RouteRequestRecord& rec) {
  const Cost best{rec.best_hop_count, rec.best_wl};
  if (cost < best) return true;
  return cost == best && ael > rec.best_ael;
}

Frame control_frame(const ControlMessage& msg) {
  Frame f;
  f.msg = msg;
  return f;
}

Actions drop_msg(DropReason reason, const ControlMessage& msg) {
  ActionDrop d;
  d.reason = reason;
  d.msg = msg;
  return {d};
}

}  // namespace

WireAel compute_ael_update(WireAel ael_in, std::uint32_t nodes_in, WireAel el_node) {
  const std::uint64_t num =
      static_cast<std::uint64_t>(ael_in) * nodes_in + el_node + (nodes_in + 1) / 2;
  const std::uint64_t mean = num / (nodes_in + 1);
  return mean > 0xFFFF ? 0xFFFF : static_cast<WireAel>(mean);
}

RoutingEntry* route_lookup(NodeState& node, Address dest, SimTime now) {
  if (dest == node.addr) {
    static thread_local RoutingEntry self_entry;
    self_entry = RoutingEntry{};
    self_entry.dest = dest;
    self_entry.next_hop = dest;
    self_entry.hop_count = 0;
    self_entry.valid = true;
    self_entry.lifetime_expiry = now + node.params.route_lifetime;
    return &self_entry;
  }
  auto it = node.routes.find(dest.value);
  if (it == node.routes.end()) return nullptr;
  RoutingEntry& entry = it->second;
  if (!entry.valid) return nullptr;
  if (entry.lifetime_expiry < now) {
    entry.valid = false;
    return nullptr;
  }
  return &entry;
}

void install_route(NodeState& node, Address dest, Address next_hop, Address second_next_hop,
                   std::uint8_t hop_count, std::uint8_t weak_links, WireAel path_ael,
                   SimTime now) {
  RoutingEntry& entry = node.routes[dest.value];
  entry.dest = dest;
  entry.next_hop = next_hop;
  entry.second_next_hop = second_next_hop;
  entry.hop_count = hop_count;
  entry.weak_links = weak_links;
  entry.path_ael = path_ael;
  entry.lifetime_expiry = now + node.params.route_lifetime;
  entry.repair_path.clear();  // a fresh install supersedes any old bypass
  entry.valid = true;
}

Actions originate_route_discovery(NodeState& node, Address dest, SimTime now) {
  if (node.pending.count(dest.value)) return {};  // discovery already in flight
  if (route_lookup(node, dest, now)) return {};

  PendingDiscovery& pd = node.pending[dest.value];
  pd.dest = dest;
  pd.attempts = 1;
  pd.rreq_id = node.fresh_rreq_id();

  ControlMessage msg;
  msg.kind = MessageKind::RREQ;
  msg.hop_count = 0;
  msg.weak_links_wl = 0;
  msg.ael = node.energy_level();
  msg.rreq_id = pd.rreq_id;
  msg.dest = dest;
  msg.originator = node.addr;

  Actions actions;
  actions.push_back(ActionBroadcast{control_frame(msg)});
  actions.push_back(
      ActionStartTimer{TimerKind::DiscoveryTimeout, dest.value, node.params.discovery_timeout()});
  return actions;
}

Actions handle_rreq(NodeState& node, const ControlMessage& msg, Address sender, SimTime now) {
  if (msg.originator == node.addr) return drop_msg(DropReason::Duplicate, msg);

  const bool weak_in = node.link_is_weak(sender);
  const Cost cost{msg.hop_count, msg.weak_links_wl};
  const auto key = std::make_pair(msg.originator.value, msg.rreq_id);
  auto it = node.rreq_seen.find(key);
  if (it != node.rreq_seen.end()) {
    if (!better_than_record(cost, msg.ael, it->second))
      return drop_msg(DropReason::Duplicate, msg);
    it->second.best_hop_count = msg.hop_count;
    it->second.best_wl = msg.weak_links_wl;
    it->second.best_ael = msg.ael;
  } else {
    RouteRequestRecord rec;
    rec.originator = msg.originator;
    rec.rreq_id = msg.rreq_id;
    rec.first_seen = now;
    rec.best_hop_count = msg.hop_count;
    rec.best_wl = msg.weak_links_wl;
    rec.best_ael = msg.ael;
    node.rreq_seen.emplace(key, rec);
  }

  Actions actions;

  // Reverse route toward the originator; the request's second next hop
  // field is zero, so the entry records none.
  const std::uint8_t rev_hops = static_cast<std::uint8_t>(msg.hop_count + 1);
  const std::uint8_t rev_wl = static_cast<std::uint8_t>(msg.weak_links_wl + (weak_in ? 1 : 0));
  install_route(node, msg.originator, sender, NULL_ADDRESS, rev_hops, rev_wl, msg.ael, now);
  actions.push_back(ActionRouteUpdate{msg.originator, sender, rev_hops, false});

  // Only the destination answers. Without freshness metadata an
  // intermediate cannot tell a live stored route from one already severed,
  // and a stale answer re-installs the broken path.
  if (msg.dest == node.addr) {
    ControlMessage rep;
    rep.kind = MessageKind::RREP;
    rep.rreq_id = msg.rreq_id;
    rep.rrep_id = node.fresh_rrep_id();
    rep.dest = msg.dest;
    rep.originator = msg.originator;
    rep.hop_count = 0;
    rep.weak_links_wl = 0;
    rep.ael = node.energy_level();
    rep.second_next_hop = NULL_ADDRESS;
    actions.push_back(ActionUnicast{sender, control_frame(rep)});
    return actions;
  }

  if (msg.hop_count + 1 > node.params.hop_limit) {
    actions.push_back(ActionDrop{DropReason::HopLimit, std::nullopt, msg});
    return actions;
  }

  ControlMessage fwd_msg = msg;
  fwd_msg.hop_count = static_cast<std::uint8_t>(msg.hop_count + 1);
  fwd_msg.ael = compute_ael_update(msg.ael, msg.hop_count + 1u, node.energy_level());
  fwd_msg.weak_links_wl = rev_wl;
  actions.push_back(ActionBroadcast{control_frame(fwd_msg)});
  return actions;
}

Actions handle_rrep(NodeState& node, const ControlMessage& msg, Address sender, SimTime now) {
  const bool weak_in = node.link_is_weak(sender);
  Actions actions;

  const std::uint8_t fwd_hops = static_cast<std::uint8_t>(msg.hop_count + 1);
  const std::uint8_t fwd_wl = static_cast<std::uint8_t>(msg.weak_links_wl + (weak_in ? 1 : 0));

  if (msg.originator == node.addr) {
    // Discovery complete at the originator.
    install_route(node, msg.dest, sender, msg.second_next_hop, fwd_hops, fwd_wl, msg.ael, now);
    actions.push_back(ActionRouteUpdate{msg.dest, sender, fwd_hops, false});
    auto pending = node.pending.find(msg.dest.value);
    if (pending != node.pending.end()) {
      for (DataPacket& pkt : pending->second.queue) {
        Frame f;
        f.msg.kind = MessageKind::Data;
        f.msg.dest = pkt.dest;
        f.msg.originator = pkt.src;
        f.data = pkt;
        actions.push_back(ActionUnicast{sender, std::move(f)});
      }
      node.pending.erase(pending);
    }
    return actions;
  }

  RoutingEntry* reverse = route_lookup(node, msg.originator, now);
  if (!reverse) return drop_msg(DropReason::NoReverseRoute, msg);

  install_route(node, msg.dest, sender, msg.second_next_hop, fwd_hops, fwd_wl, msg.ael, now);
  actions.push_back(ActionRouteUpdate{msg.dest, sender, fwd_hops, false});
  RoutingEntry& fwd_entry = node.routes[msg.dest.value];
  fwd_entry.add_precursor(reverse->next_hop);

  if (msg.hop_count + 1 > node.params.hop_limit)
    return drop_msg(DropReason::HopLimit, msg);

  ControlMessage fwd_msg = msg;
  fwd_msg.hop_count = fwd_hops;
  fwd_msg.weak_links_wl = fwd_wl;
  fwd_msg.ael = compute_ael_update(msg.ael, msg.hop_count + 1u, node.energy_level());
  // Piggyback for repair targeting: the node we learned the route from is
  // our next hop, i.e. the receiver's hop-after-next.
  fwd_msg.second_next_hop = sender;
  actions.push_back(ActionUnicast{reverse->next_hop, control_frame(fwd_msg)});
  return actions;
}

namespace {

// The error travels upstream along the precursor list of the broken entry;
// those neighbours are the live data path, unlike a reverse route that only
// stays fresh while traffic flows toward the originator.
std::vector<Address> rerr_targets(NodeState& node, Address failed_dest, Address data_originator,
                                  SimTime now) {
  auto it = node.routes.find(failed_dest.value);
  if (it != node.routes.end() && !it->second.precursors.empty()) return it->second.precursors;
  if (RoutingEntry* reverse = route_lookup(node, data_originator, now))
    return {reverse->next_hop};
  return {};
}

}  // namespace

Actions emit_rerr(NodeState& node, RerrCode code, Address failed_dest, Address data_originator,
                  SimTime now) {
  RerrPayload payload;
  payload.error_code = code;
  payload.failed_dest = failed_dest;
  payload.originator_of_data = data_originator;

  if (data_originator == node.addr) {
    // Local delivery: behave as if the error arrived over the air.
    return handle_rerr(node, make_rerr(payload, node.addr), node.addr, now);
  }
  if (!node.rerr_budget.try_consume(now)) return {};  // over the rate limit: discard

  const std::vector<Address> targets = rerr_targets(node, failed_dest, data_originator, now);
  if (targets.empty()) {
    ActionDrop d;
    d.reason = DropReason::NoRoute;
    d.msg = make_rerr(payload, node.addr);
    return {d};
  }
  Actions actions;
  for (Address to : targets)
    actions.push_back(ActionUnicast{to, control_frame(make_rerr(payload, node.addr))});
  return actions;
}

Actions handle_rerr(NodeState& node, const ControlMessage& msg, Address sender, SimTime now) {
  (void)sender;
  const RerrPayload payload = rerr_payload(msg);

  if (payload.originator_of_data == node.addr) {
    // The failure reached the data source: invalidate and rediscover if
    // traffic is still queued for that destination.
    auto it = node.routes.find(payload.failed_dest.value);
    if (it != node.routes.end()) it->second.valid = false;
    auto pending = node.pending.find(payload.failed_dest.value);
    if (pending != node.pending.end() && !pending->second.queue.empty()) {
      // Restart the discovery machinery for the queued packets.
      auto queue = std::move(pending->second.queue);
      node.pending.erase(pending);
      Actions actions = originate_route_discovery(node, payload.failed_dest, now);
      node.pending[payload.failed_dest.value].queue = std::move(queue);
      return actions;
    }
    return {};
  }

  if (msg.hop_count + 1 > node.params.hop_limit) return drop_msg(DropReason::HopLimit, msg);
  const std::vector<Address> targets =
      rerr_targets(node, payload.failed_dest, payload.originator_of_data, now);

  auto it = node.routes.find(payload.failed_dest.value);
  if (it != node.routes.end()) it->second.valid = false;

  if (targets.empty()) return drop_msg(DropReason::NoRoute, msg);
  ControlMessage fwd = msg;
  fwd.hop_count = static_cast<std::uint8_t>(msg.hop_count + 1);
  Actions actions;
  for (Address to : targets) actions.push_back(ActionUnicast{to, control_frame(fwd)});
  return actions;
}

Actions forward_data(NodeState& node, const DataPacket& pkt, SimTime now) {
  return forward_data(node, pkt, now, 0, NULL_ADDRESS);
}

Actions forward_data(NodeState& node, const DataPacket& pkt, SimTime now,
                     std::uint8_t hops_so_far, Address from) {
  // An active repair for this destination buffers the packet instead of
  // poking the broken link again.
  for (auto& [id, session] : node.repair_sessions) {
    if (session.final_dest == pkt.dest) {
      if (session.buffered.size() >= node.params.buffer_capacity)
        return {ActionDrop{DropReason::BufferOverflow, pkt, std::nullopt}};
      session.buffered.push_back(pkt);
      return {ActionEnqueue{pkt}};
    }
  }
  for (auto& [id, session] : node.load_sessions) {
    if (session.final_dest == pkt.dest) {
      if (session.buffered.size() >= node.params.buffer_capacity)
        return {ActionDrop{DropReason::BufferOverflow, pkt, std::nullopt}};
      session.buffered.push_back(pkt);
      return {ActionEnqueue{pkt}};
    }
  }

  RoutingEntry* entry = route_lookup(node, pkt.dest, now);
  if (!entry) {
    Actions actions{ActionDrop{DropReason::NoRoute, pkt, std::nullopt}};
    if (!from.is_null() && node.rerr_budget.try_consume(now)) {
      // Report straight to the neighbour that handed us the packet; it is
      // alive by construction and relays the error upstream.
      RerrPayload payload{RerrCode::NoRoute, pkt.dest, pkt.src};
      actions.push_back(ActionUnicast{from, control_frame(make_rerr(payload, node.addr))});
    } else if (from.is_null()) {
      Actions rerr = emit_rerr(node, RerrCode::NoRoute, pkt.dest, pkt.src, now);
      actions.insert(actions.end(), rerr.begin(), rerr.end());
    }
    return actions;
  }
  entry->lifetime_expiry = now + node.params.route_lifetime;  // refresh on use
  // The data plane keeps the precursor list current: whoever relays through
  // us is where a later route error must travel.
  if (!from.is_null()) entry->add_precursor(from);

  Frame f;
  f.msg.kind = MessageKind::Data;
  f.msg.hop_count = hops_so_far;
  f.msg.dest = pkt.dest;
  f.msg.originator = pkt.src;
  f.data = pkt;
  if (!entry->repair_path.empty()) {
    // Patched entry: the bypass is one virtual link, relayed hop by hop
    // along the recorded path until table forwarding resumes at its end.
    f.relay_path = entry->repair_path;
    f.route_index = 1;
  }
  return {ActionUnicast{entry->next_hop, std::move(f)}};
}

Actions handle_data(NodeState& node, const Frame& frame, Address sender, SimTime now) {
  const DataPacket& pkt = *frame.data;
  if (pkt.dest == node.addr) return {ActionDeliver{pkt}};

  // Data frames are bounded by the wire field, not the control flood limit:
  // a repaired route may legitimately exceed the request dissemination bound.
  if (frame.msg.hop_count + 1 > MAX_HOP_COUNT)
    return {ActionDrop{DropReason::HopLimit, pkt, std::nullopt}};
  const std::uint8_t hops = static_cast<std::uint8_t>(frame.msg.hop_count + 1);

  if (!frame.relay_path.empty()) {
    const std::size_t i = frame.route_index;
    if (i < frame.relay_path.size() && frame.relay_path[i] == node.addr) {
      if (i + 1 < frame.relay_path.size()) {
        Frame fwd = frame;
        fwd.msg.hop_count = hops;
        fwd.route_index = i + 1;
        return {ActionUnicast{frame.relay_path[i + 1], std::move(fwd)}};
      }
      // End of the bypass: back to table forwarding. Should the table have
      // nothing, the error retraces the bypass to its anchor, because the
      // relayers in between hold no state for this flow.
      if (!route_lookup(node, pkt.dest, now) && i >= 1) {
        Actions actions{ActionDrop{DropReason::NoRoute, pkt, std::nullopt}};
        if (node.rerr_budget.try_consume(now)) {
          RerrPayload payload{RerrCode::NoRoute, pkt.dest, pkt.src};
          Frame rerr;
          rerr.msg = make_rerr(payload, node.addr);
          rerr.relay_path.assign(frame.relay_path.rbegin(), frame.relay_path.rend());
          rerr.route_index = 1;
          actions.push_back(ActionUnicast{rerr.relay_path[1], std::move(rerr)});
        }
        return actions;
      }
    }
  }
  return forward_data(node, pkt, now, hops, sender);
}

Actions app_send(NodeState& node, const DataPacket& pkt, SimTime now) {
  if (route_lookup(node, pkt.dest, now)) return forward_data(node, pkt, now);

  // No route: queue behind a (possibly new) discovery.
  Actions actions = originate_route_discovery(node, pkt.dest, now);
  PendingDiscovery& pd = node.pending[pkt.dest.value];
  pd.dest = pkt.dest;
  if (pd.queue.size() >= node.params.buffer_capacity) {
    actions.push_back(ActionDrop{DropReason::BufferOverflow, pkt, std::nullopt});
    return actions;
  }
  pd.queue.push_back(pkt);
  actions.push_back(ActionEnqueue{pkt});
  return actions;
}

Actions link_break(NodeState& node, Address failed_next_hop, const Frame& frame, SimTime now) {
  const DataPacket& pkt = *frame.data;

  // A break on a bypass we are merely relaying for: no routing state for
  // the flow lives here, so the error retraces the bypass to its anchor,
  // which holds the patched entry and the precursor chain to the source.
  const std::size_t receiver_idx = frame.route_index;
  if (!frame.relay_path.empty() && receiver_idx >= 2 &&
      receiver_idx < frame.relay_path.size() &&
      frame.relay_path[receiver_idx - 1] == node.addr) {
    Actions actions{ActionDrop{DropReason::NoRoute, pkt, std::nullopt}};
    auto snh_entry = node.routes.find(frame.relay_path.back().value);
    if (snh_entry != node.routes.end() && snh_entry->second.next_hop == failed_next_hop)
      snh_entry->second.valid = false;
    if (node.rerr_budget.try_consume(now)) {
      RerrPayload payload;
      payload.error_code = RerrCode::NoRoute;
      payload.failed_dest = pkt.dest;
      payload.originator_of_data = pkt.src;
      Frame rerr;
      rerr.msg = make_rerr(payload, node.addr);
      rerr.relay_path.assign(frame.relay_path.rend() - receiver_idx, frame.relay_path.rend());
      rerr.route_index = 1;
      actions.push_back(ActionUnicast{rerr.relay_path[1], std::move(rerr)});
    }
    return actions;
  }

  if (node.params.protocol == Protocol::LRABC)
    return lrabc::detect_link_break(node, failed_next_hop, pkt, now);
  return load::detect_link_break(node, failed_next_hop, pkt, now);
}

Actions handle_frame(NodeState& node, const Frame& frame, Address sender, SimTime now) {
  switch (frame.msg.kind) {
    case MessageKind::RREQ: return handle_rreq(node, frame.msg, sender, now);
    case MessageKind::RREP: {
      Actions actions = handle_rrep(node, frame.msg, sender, now);
      if (frame.msg.originator == node.addr) {
        // A completed repair discovery releases its session buffer.
        for (auto& [id, session] : node.load_sessions) {
          if (session.final_dest == frame.msg.dest) {
            Actions done = load::complete_repair(node, id, now);
            actions.insert(actions.end(), done.begin(), done.end());
            break;
          }
        }
      }
      return actions;
    }
    case MessageKind::LocalRREQ: return lrabc::handle_local_rreq(node, frame, sender, now);
    case MessageKind::LocalRREP: return lrabc::handle_local_rrep(node, frame, sender, now);
    case MessageKind::RERR: {
      // An error retracing a bypass is relayed along its recorded path; the
      // final node (the patch anchor) processes it normally.
      const std::size_t i = frame.route_index;
      if (!frame.relay_path.empty() && i + 1 < frame.relay_path.size() &&
          frame.relay_path[i] == node.addr) {
        const RerrPayload payload = rerr_payload(frame.msg);
        auto it = node.routes.find(payload.failed_dest.value);
        if (it != node.routes.end()) it->second.valid = false;
        if (frame.msg.hop_count + 1 > node.params.hop_limit)
          return drop_msg(DropReason::HopLimit, frame.msg);
        Frame fwd = frame;
        fwd.msg.hop_count = static_cast<std::uint8_t>(frame.msg.hop_count + 1);
        fwd.route_index = i + 1;
        return {ActionUnicast{frame.relay_path[i + 1], std::move(fwd)}};
      }
      return handle_rerr(node, frame.msg, sender, now);
    }
    case MessageKind::Data: return handle_data(node, frame, sender, now);
  }
  return {};
}

Actions handle_timer(NodeState& node, TimerKind kind, std::uint64_t key, SimTime now) {
  switch (kind) {
    case TimerKind::DiscoveryTimeout: {
      auto it = node.pending.find(static_cast<std::uint16_t>(key));
      if (it == node.pending.end()) return {};  // discovery already satisfied
      PendingDiscovery& pd = it->second;
      if (pd.attempts < 2) {
        // One retry with a fresh request id.
        pd.attempts += 1;
        pd.rreq_id = node.fresh_rreq_id();
        ControlMessage msg;
        msg.kind = MessageKind::RREQ;
        msg.ael = node.energy_level();
        msg.rreq_id = pd.rreq_id;
        msg.dest = pd.dest;
        msg.originator = node.addr;
        Actions actions;
        actions.push_back(ActionBroadcast{control_frame(msg)});
        actions.push_back(ActionStartTimer{TimerKind::DiscoveryTimeout, key,
                                           node.params.discovery_timeout()});
        return actions;
      }
      Actions actions;
      for (const DataPacket& pkt : pd.queue)
        actions.push_back(ActionDrop{DropReason::NoRoute, pkt, std::nullopt});
      node.pending.erase(it);
      return actions;
    }
    case TimerKind::RepairTimeout:
      return lrabc::finalize_repair(node, static_cast<std::uint32_t>(key), now);
    case TimerKind::SnhWindow: return lrabc::on_snh_window_close(node, key, now);
    case TimerKind::LoadRepairDeadline:
      return load::handle_repair_failure(node, static_cast<std::uint32_t>(key), now);
    case TimerKind::ParticipantExpire: return lrabc::on_participant_expire(node, key, now);
  }
  return {};
}

}  // namespace sixmesh::routing
