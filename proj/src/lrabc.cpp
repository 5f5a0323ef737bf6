#include "sixmesh/lrabc.hpp"

#include <algorithm>

#include "sixmesh/routing.hpp"

namespace sixmesh {

int compare_local_links(const CandidateLink& a, const CandidateLink& b) {
  if (a.ael != b.ael) return a.ael > b.ael ? -1 : 1;
  if (a.hop_count != b.hop_count) return a.hop_count < b.hop_count ? -1 : 1;
  if (a.wl != b.wl) return a.wl < b.wl ? -1 : 1;
  if (a.next_hop_toward_snh != b.next_hop_toward_snh)
    return a.next_hop_toward_snh < b.next_hop_toward_snh ? -1 : 1;
  return 0;
}

namespace lrabc {

namespace {

Actions drop_msg(DropReason reason, const ControlMessage& msg) {
  ActionDrop d;
  d.reason = reason;
  d.msg = msg;
  return {d};
}

bool contains(const std::vector<Address>& path, Address a) {
  return std::find(path.begin(), path.end(), a) != path.end();
}

RepairSession* find_session_by_flood(NodeState& node, std::uint8_t rreq_id) {
  for (auto& [id, session] : node.repair_sessions)
    if (session.rreq_id == rreq_id) return &session;
  return nullptr;
}

Actions buffer_into_session(NodeState& node, RepairSession& session, const DataPacket& pkt) {
  if (session.buffered.size() >= node.params.buffer_capacity)
    return {ActionDrop{DropReason::BufferOverflow, pkt, std::nullopt}};
  session.buffered.push_back(pkt);
  return {ActionEnqueue{pkt}};
}

}  // namespace

std::uint64_t flood_key(Address upstream, std::uint8_t rreq_id) {
  return (static_cast<std::uint64_t>(upstream.value) << 8) | rreq_id;
}

Actions detect_link_break(NodeState& node, Address failed_next_hop, const DataPacket& packet,
                          SimTime now) {
  for (auto& [id, session] : node.repair_sessions) {
    if (session.abandoned == failed_next_hop && session.final_dest == packet.dest)
      return buffer_into_session(node, session, packet);
  }

  auto route_it = node.routes.find(packet.dest.value);

  if (failed_next_hop == packet.dest) {
    // The abandoned node is the destination itself: nothing to bypass.
    if (route_it != node.routes.end()) route_it->second.valid = false;
    Actions actions{ActionDrop{DropReason::NodeUnreachable, packet, std::nullopt}};
    Actions rerr =
        routing::emit_rerr(node, RerrCode::NodeUnreachable, packet.dest, packet.src, now);
    actions.insert(actions.end(), rerr.begin(), rerr.end());
    return actions;
  }

  Address snh = route_it != node.routes.end() ? route_it->second.second_next_hop : NULL_ADDRESS;
  if (route_it != node.routes.end()) {
    // A bypass that has been spliced repeatedly stops being local; past
    // twice the repair horizon the detour is surrendered to a fresh
    // end-to-end discovery instead.
    const auto& old_path = route_it->second.repair_path;
    if (old_path.size() > 2 * (static_cast<std::size_t>(node.params.local_ttl) + 1))
      snh = NULL_ADDRESS;
  }
  if (snh.is_null() || snh == failed_next_hop) {
    // No usable second next hop on record; fall back to reporting the loss.
    if (route_it != node.routes.end()) route_it->second.valid = false;
    Actions actions{ActionDrop{DropReason::NoRoute, packet, std::nullopt}};
    Actions rerr = routing::emit_rerr(node, RerrCode::NoRoute, packet.dest, packet.src, now);
    actions.insert(actions.end(), rerr.begin(), rerr.end());
    return actions;
  }

  RepairSession session;
  session.id = node.fresh_session_id();
  session.upstream = node.addr;
  session.abandoned = failed_next_hop;
  session.second_next_hop = snh;
  session.final_dest = packet.dest;
  session.data_originator = packet.src;
  session.buffered.push_back(packet);
  if (route_it != node.routes.end()) {
    const auto& old_path = route_it->second.repair_path;
    if (old_path.size() > 3 && old_path[1] == failed_next_hop)
      session.splice_tail.assign(old_path.begin() + 3, old_path.end());
  }
  auto [it, inserted] = node.repair_sessions.emplace(session.id, std::move(session));

  Actions actions;
  actions.push_back(ActionSessionOpen{it->second.id, failed_next_hop, snh, packet.dest});
  actions.push_back(ActionEnqueue{packet});
  Actions initiate = initiate_local_rreq(it->second, node, now);
  actions.insert(actions.end(), initiate.begin(), initiate.end());
  return actions;
}

Actions initiate_local_rreq(RepairSession& session, NodeState& node, SimTime now) {
  session.rreq_id = node.fresh_rreq_id();
  session.trial_rreq_ids.push_back(session.rreq_id);
  session.trials_used += 1;
  session.deadline = now + node.params.repair_window();

  ControlMessage msg;
  msg.kind = MessageKind::LocalRREQ;
  msg.hop_count = 0;
  msg.weak_links_wl = 0;
  msg.ael = node.energy_level();
  msg.rreq_id = session.rreq_id;
  msg.dest = session.second_next_hop;
  msg.originator = session.upstream;
  msg.second_next_hop = session.second_next_hop;

  Frame frame;
  frame.msg = msg;
  frame.relay_path = {node.addr};

  Actions actions;
  actions.push_back(
      ActionPhaseShift{session.upstream, session.rreq_id, session.phase, BeePhase::Scout});
  session.phase = BeePhase::Scout;
  actions.push_back(ActionBroadcast{std::move(frame)});
  actions.push_back(
      ActionStartTimer{TimerKind::RepairTimeout, session.id, node.params.repair_window()});
  return actions;
}

Actions handle_local_rreq(NodeState& node, const Frame& frame, Address sender, SimTime now) {
  const ControlMessage& msg = frame.msg;
  if (msg.originator == node.addr) return drop_msg(DropReason::Duplicate, msg);
  if (contains(frame.relay_path, node.addr)) return drop_msg(DropReason::Duplicate, msg);
  if (node.addr == msg.second_next_hop) return snh_handle_local_rreq(node, frame, sender, now);

  const std::uint8_t new_hc = static_cast<std::uint8_t>(msg.hop_count + 1);
  if (new_hc > node.params.local_ttl) return drop_msg(DropReason::LocalTtl, msg);

  const std::uint64_t key = flood_key(msg.originator, msg.rreq_id);
  Actions actions;
  auto it = node.participants.find(key);
  if (it == node.participants.end()) {
    RepairParticipant part;
    part.upstream = msg.originator;
    part.rreq_id = msg.rreq_id;
    part.expires = now + node.params.participant_ttl();
    it = node.participants.emplace(key, std::move(part)).first;
    actions.push_back(
        ActionStartTimer{TimerKind::ParticipantExpire, key, node.params.participant_ttl()});
  }
  RepairParticipant& part = it->second;

  const WireAel new_ael =
      routing::compute_ael_update(msg.ael, msg.hop_count + 1u, node.energy_level());
  std::vector<Address> new_path = frame.relay_path;
  new_path.push_back(node.addr);

  auto copy_better = [](const RelayedCopy& a, const RelayedCopy& b) {
    return a.ael > b.ael || (a.ael == b.ael && a.path < b.path);
  };
  constexpr std::size_t RELAY_SLOTS = 2;
  std::vector<RelayedCopy>& slots = part.relayed[new_hc];
  RelayedCopy candidate{new_ael, new_path};
  for (const RelayedCopy& have : slots)
    if (have.path == new_path) return drop_msg(DropReason::Duplicate, msg);
  if (slots.size() >= RELAY_SLOTS) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < slots.size(); ++i)
      if (copy_better(slots[worst], slots[i])) worst = i;
    if (!copy_better(candidate, slots[worst])) return drop_msg(DropReason::Duplicate, msg);
    slots[worst] = candidate;
  } else {
    slots.push_back(candidate);
  }

  if (part.phase != BeePhase::Scout) {
    actions.push_back(
        ActionPhaseShift{part.upstream, part.rreq_id, part.phase, BeePhase::Scout});
    part.phase = BeePhase::Scout;
  }

  Frame fwd = frame;
  fwd.msg.hop_count = new_hc;
  fwd.msg.ael = new_ael;
  fwd.msg.weak_links_wl =
      static_cast<std::uint8_t>(msg.weak_links_wl + (node.link_is_weak(sender) ? 1 : 0));
  fwd.relay_path = std::move(new_path);
  actions.push_back(ActionBroadcast{std::move(fwd)});
  return actions;
}

Actions snh_handle_local_rreq(NodeState& node, const Frame& frame, Address sender, SimTime now) {
  (void)now;
  const ControlMessage& msg = frame.msg;
  const std::uint64_t key = flood_key(msg.originator, msg.rreq_id);
  if (node.closed_snh_windows.count(key)) return drop_msg(DropReason::WindowClosed, msg);
  if (contains(frame.relay_path, node.addr)) return drop_msg(DropReason::Duplicate, msg);

  Actions actions;
  auto it = node.snh_collectors.find(key);
  if (it == node.snh_collectors.end()) {
    SnhCollector collector;
    collector.upstream = msg.originator;
    collector.rreq_id = msg.rreq_id;
    it = node.snh_collectors.emplace(key, std::move(collector)).first;
    actions.push_back(ActionStartTimer{TimerKind::SnhWindow, key, node.params.snh_window()});
  }
  SnhCollector& collector = it->second;
  for (const auto& copy : collector.copies)
    if (copy.path == frame.relay_path) {
      Actions dup = drop_msg(DropReason::Duplicate, msg);
      actions.insert(actions.end(), dup.begin(), dup.end());
      return actions;
    }

  SnhCopy copy;
  copy.sender = sender;
  copy.path = frame.relay_path;
  copy.hop_count = msg.hop_count;
  copy.wl = static_cast<std::uint8_t>(msg.weak_links_wl + (node.link_is_weak(sender) ? 1 : 0));
  collector.copies.push_back(std::move(copy));
  return actions;
}

Actions on_snh_window_close(NodeState& node, std::uint64_t key, SimTime now) {
  (void)now;
  auto it = node.snh_collectors.find(key);
  if (it == node.snh_collectors.end()) return {};
  SnhCollector collector = std::move(it->second);
  node.snh_collectors.erase(it);
  node.closed_snh_windows.insert(key);

  // One reply per discovered path, each its own food source.
  Actions actions;
  for (const SnhCopy& copy : collector.copies) {
    ControlMessage rep;
    rep.kind = MessageKind::LocalRREP;
    rep.hop_count = 0;
    rep.weak_links_wl = 0;
    rep.ael = node.energy_level();
    rep.rreq_id = collector.rreq_id;
    rep.rrep_id = node.fresh_rrep_id();
    rep.dest = node.addr;               // route target: this second next hop
    rep.originator = collector.upstream;
    rep.second_next_hop = node.addr;

    Frame frame;
    frame.msg = rep;
    frame.relay_path = copy.path;        // upstream..last relayer
    frame.relay_path.push_back(node.addr);
    frame.route_index = frame.relay_path.size() - 2;  // receiver's position
    actions.push_back(ActionUnicast{copy.sender, std::move(frame)});
  }
  return actions;
}

Actions handle_local_rrep(NodeState& node, const Frame& frame, Address sender, SimTime now) {
  const ControlMessage& msg = frame.msg;
  const std::size_t i = frame.route_index;
  if (i >= frame.relay_path.size() || frame.relay_path[i] != node.addr)
    return drop_msg(DropReason::NoSession, msg);

  const std::uint8_t new_hc = static_cast<std::uint8_t>(msg.hop_count + 1);
  const WireAel new_ael =
      routing::compute_ael_update(msg.ael, msg.hop_count + 1u, node.energy_level());
  const std::uint8_t new_wl =
      static_cast<std::uint8_t>(msg.weak_links_wl + (node.link_is_weak(sender) ? 1 : 0));

  CandidateLink cand;
  cand.hop_count = new_hc;
  cand.ael = new_ael;
  cand.wl = new_wl;
  cand.rrep_id = msg.rrep_id;
  cand.path = frame.relay_path;

  if (i == 0) {
    // Anchor onlooker: the upstream node selects, nothing is forwarded.
    RepairSession* session = find_session_by_flood(node, msg.rreq_id);
    if (!session || session->upstream != msg.originator)
      return drop_msg(DropReason::NoSession, msg);
    cand.next_hop_toward_snh = sender;

    Actions actions;
    if (session->phase == BeePhase::Scout) {
      actions.push_back(ActionPhaseShift{session->upstream, session->rreq_id, session->phase,
                                         BeePhase::Employed});
      session->phase = BeePhase::Employed;
    }
    for (std::size_t k = 1; k < cand.path.size(); ++k)
      session->participants.insert(cand.path[k]);

    if (session->best_link && compare_local_links(cand, *session->best_link) >= 0) {
      Actions dropped = drop_msg(DropReason::WorseCandidate, msg);
      actions.insert(actions.end(), dropped.begin(), dropped.end());
      return actions;
    }
    session->best_link = cand;
    actions.push_back(ActionCandidateUpdate{session->id, cand.ael, cand.hop_count, cand.wl,
                                            cand.next_hop_toward_snh});
    return actions;
  }

  // Intermediate onlooker/employed relay.
  const std::uint64_t key = flood_key(msg.originator, msg.rreq_id);
  auto it = node.participants.find(key);
  if (it == node.participants.end()) return drop_msg(DropReason::NoSession, msg);
  RepairParticipant& part = it->second;

  Actions actions;
  if (part.phase == BeePhase::Scout) {
    actions.push_back(
        ActionPhaseShift{part.upstream, part.rreq_id, part.phase, BeePhase::Employed});
    part.phase = BeePhase::Employed;
  }

  cand.next_hop_toward_snh = sender;
  if (!part.best || compare_local_links(cand, *part.best) < 0) part.best = cand;

  // Toward-the-target route learned from the reply leg.
  routing::install_route(node, msg.dest, sender, NULL_ADDRESS, new_hc, new_wl, new_ael, now);

  // Every distinct reply is relayed to the anchor: selection happens there,
  // so a candidate that merely looks worse mid-path is not discarded.
  Frame fwd = frame;
  fwd.msg.hop_count = new_hc;
  fwd.msg.ael = new_ael;
  fwd.msg.weak_links_wl = new_wl;
  fwd.route_index = i - 1;
  actions.push_back(ActionUnicast{frame.relay_path[i - 1], std::move(fwd)});
  return actions;
}

Actions finalize_repair(NodeState& node, std::uint32_t session_id, SimTime now) {
  auto it = node.repair_sessions.find(session_id);
  if (it == node.repair_sessions.end()) return {};
  RepairSession& session = it->second;

  if (session.best_link) {
    const CandidateLink& best = *session.best_link;
    auto route_it = node.routes.find(session.final_dest.value);
    const std::uint8_t tail_hops =
        route_it != node.routes.end() && route_it->second.hop_count > 2
            ? static_cast<std::uint8_t>(route_it->second.hop_count - 2)
            : 0;
    std::vector<Address> bypass = best.path;
    bypass.insert(bypass.end(), session.splice_tail.begin(), session.splice_tail.end());
    RoutingEntry& entry = node.routes[session.final_dest.value];
    entry.dest = session.final_dest;
    entry.next_hop = best.next_hop_toward_snh;
    entry.second_next_hop = bypass.size() > 2 ? bypass[2] : NULL_ADDRESS;
    entry.hop_count = static_cast<std::uint8_t>(
        std::min<std::uint32_t>(best.hop_count + tail_hops, MAX_HOP_COUNT));
    entry.weak_links = best.wl;
    entry.path_ael = best.ael;
    entry.repair_path = bypass;
    entry.lifetime_expiry = now + node.params.route_lifetime;
    entry.valid = true;

    Actions actions;
    actions.push_back(
        ActionRouteUpdate{session.final_dest, entry.next_hop, entry.hop_count, true});
    for (const DataPacket& pkt : session.buffered) {
      Frame f;
      f.msg.kind = MessageKind::Data;
      f.msg.dest = pkt.dest;
      f.msg.originator = pkt.src;
      f.data = pkt;
      f.relay_path = bypass;
      f.route_index = 1;
      actions.push_back(ActionUnicast{best.next_hop_toward_snh, std::move(f)});
    }
    actions.push_back(
        ActionPhaseShift{session.upstream, session.rreq_id, session.phase, BeePhase::Idle});
    ActionSessionClose close;
    close.session_id = session.id;
    close.outcome = SessionOutcome::Success;
    close.best_rrep_id = best.rrep_id;
    close.best_ael = best.ael;
    close.best_hops = best.hop_count;
    close.best_wl = best.wl;
    close.best_next_hop = best.next_hop_toward_snh;
    close.path = best.path;
    close.trial_rreq_ids = session.trial_rreq_ids;
    close.upstream = session.upstream;
    close.abandoned = session.abandoned;
    close.participants = static_cast<std::uint32_t>(session.participants.size());
    actions.push_back(std::move(close));
    node.repair_sessions.erase(it);
    return actions;
  }

  if (session.trials_used < node.params.trial_limit) {
    Actions actions;
    actions.push_back(
        ActionPhaseShift{session.upstream, session.rreq_id, session.phase, BeePhase::Idle});
    session.phase = BeePhase::Idle;
    Actions initiate = initiate_local_rreq(session, node, now);
    actions.insert(actions.end(), initiate.begin(), initiate.end());
    return actions;
  }

  // Trials exhausted: report the failure toward the data originator.
  Actions actions;
  auto route_it = node.routes.find(session.final_dest.value);
  if (route_it != node.routes.end()) route_it->second.valid = false;
  for (const DataPacket& pkt : session.buffered)
    actions.push_back(ActionDrop{DropReason::RepairFailed, pkt, std::nullopt});
  actions.push_back(
      ActionPhaseShift{session.upstream, session.rreq_id, session.phase, BeePhase::Idle});
  ActionSessionClose close;
  close.session_id = session.id;
  close.outcome = SessionOutcome::Failed;
  close.trial_rreq_ids = session.trial_rreq_ids;
  close.upstream = session.upstream;
  close.abandoned = session.abandoned;
  close.participants = static_cast<std::uint32_t>(session.participants.size());
  actions.push_back(std::move(close));

  const Address final_dest = session.final_dest;
  const Address data_originator = session.data_originator;
  node.repair_sessions.erase(it);
  Actions rerr = routing::emit_rerr(node, RerrCode::RepairFailed, final_dest, data_originator, now);
  actions.insert(actions.end(), rerr.begin(), rerr.end());
  return actions;
}

Actions on_participant_expire(NodeState& node, std::uint64_t key, SimTime now) {
  (void)now;
  auto it = node.participants.find(key);
  if (it == node.participants.end()) return {};
  Actions actions;
  if (it->second.phase != BeePhase::Idle) {
    actions.push_back(ActionPhaseShift{it->second.upstream, it->second.rreq_id, it->second.phase,
                                       BeePhase::Idle});
  }
  node.participants.erase(it);
  return actions;
}

}  // namespace lrabc
}  // namespace sixmesh
