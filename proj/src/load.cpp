#include "sixmesh/load.hpp"

#include "sixmesh/routing.hpp"

namespace sixmesh::load {

namespace {

Actions buffer_into_session(NodeState& node, LoadRepairSession& session, const DataPacket& pkt) {
  if (session.buffered.size() >= node.params.buffer_capacity)
    return {ActionDrop{DropReason::BufferOverflow, pkt, std::nullopt}};
  session.buffered.push_back(pkt);
  return {ActionEnqueue{pkt}};
}

}  // namespace

Actions detect_link_break(NodeState& node, Address failed_next_hop, const DataPacket& packet,
                          SimTime now) {
  for (auto& [id, session] : node.load_sessions) {
    if (session.final_dest == packet.dest) return buffer_into_session(node, session, packet);
  }

  auto route_it = node.routes.find(packet.dest.value);
  if (route_it != node.routes.end()) route_it->second.valid = false;

  LoadRepairSession session;
  session.id = node.fresh_session_id();
  session.upstream = node.addr;
  session.abandoned = failed_next_hop;
  session.final_dest = packet.dest;
  session.data_originator = packet.src;
  session.deadline = now + node.params.load_repair_deadline();
  session.rreq_id = node.fresh_rreq_id();
  session.buffered.push_back(packet);
  auto [it, inserted] = node.load_sessions.emplace(session.id, std::move(session));

  // Repair request on behalf of the originator: own address in the
  // originator field, original destination kept, full-network dissemination.
  ControlMessage msg;
  msg.kind = MessageKind::RREQ;
  msg.hop_count = 0;
  msg.weak_links_wl = 0;
  msg.ael = node.energy_level();
  msg.rreq_id = it->second.rreq_id;
  msg.dest = packet.dest;
  msg.originator = node.addr;

  Frame frame;
  frame.msg = msg;

  Actions actions;
  actions.push_back(
      ActionSessionOpen{it->second.id, failed_next_hop, NULL_ADDRESS, packet.dest});
  actions.push_back(ActionEnqueue{packet});
  actions.push_back(ActionBroadcast{std::move(frame)});
  actions.push_back(ActionStartTimer{TimerKind::LoadRepairDeadline, it->second.id,
                                     node.params.load_repair_deadline()});
  return actions;
}

Actions complete_repair(NodeState& node, std::uint32_t session_id, SimTime now) {
  auto it = node.load_sessions.find(session_id);
  if (it == node.load_sessions.end()) return {};
  LoadRepairSession session = std::move(it->second);
  node.load_sessions.erase(it);

  Actions actions;
  for (const DataPacket& pkt : session.buffered) {
    Actions fwd = routing::forward_data(node, pkt, now);
    actions.insert(actions.end(), fwd.begin(), fwd.end());
  }
  ActionSessionClose close;
  close.session_id = session.id;
  close.outcome = SessionOutcome::Success;
  close.trial_rreq_ids = {session.rreq_id};
  close.upstream = session.upstream;
  close.abandoned = session.abandoned;
  actions.push_back(std::move(close));
  return actions;
}

Actions handle_repair_failure(NodeState& node, std::uint32_t session_id, SimTime now) {
  auto it = node.load_sessions.find(session_id);
  if (it == node.load_sessions.end()) return {};  // repair completed in time
  LoadRepairSession session = std::move(it->second);
  node.load_sessions.erase(it);

  auto route_it = node.routes.find(session.final_dest.value);
  if (route_it != node.routes.end()) route_it->second.valid = false;

  // The error is subject to the per-node rate limit; when over budget the
  // buffered packets are discarded without a report.
  Actions actions;
  for (const DataPacket& pkt : session.buffered)
    actions.push_back(ActionDrop{DropReason::RepairFailed, pkt, std::nullopt});
  ActionSessionClose close;
  close.session_id = session.id;
  close.outcome = SessionOutcome::Failed;
  close.trial_rreq_ids = {session.rreq_id};
  close.upstream = session.upstream;
  close.abandoned = session.abandoned;
  actions.push_back(std::move(close));

  Actions rerr = routing::emit_rerr(node, RerrCode::RepairFailed, session.final_dest,
                                    session.data_originator, now);
  actions.insert(actions.end(), rerr.begin(), rerr.end());
  return actions;
}

}  // namespace sixmesh::load
