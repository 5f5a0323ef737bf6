#include "doctest.h"
#include "test_helpers.hpp"

#include "sixmesh/lrabc.hpp"

using namespace sixmesh;
using namespace sixmesh::test;
using routing::compute_ael_update;

namespace {

CandidateLink cand(double ael_mah, std::uint8_t hops, std::uint8_t wl, std::uint16_t next_hop) {
  CandidateLink c;
  c.ael = wire_mah(ael_mah);
  c.hop_count = hops;
  c.wl = wl;
  c.next_hop_toward_snh = Address{next_hop};
  return c;
}

// A node holding the broken route 1 -> 2 -> 3 -> ... (dest 8), with the
// second next hop recorded from the reply leg.
NodeState upstream_with_route() {
  NodeState node = make_node(1, Protocol::LRABC, 3.0);
  routing::install_route(node, Address{8}, Address{2}, Address{3}, 7, 0, wire_mah(5.0), 0);
  routing::install_route(node, Address{1}, Address{1}, NULL_ADDRESS, 0, 0, 0, 0);
  return node;
}

}  // namespace

TEST_CASE("candidate ordering: energy first, then hops, weak links, address") {
  CHECK(compare_local_links(cand(2.5, 3, 0, 4), cand(2.0, 1, 0, 4)) < 0);
  CHECK(compare_local_links(cand(2.0, 2, 0, 4), cand(2.0, 3, 0, 4)) < 0);
  CHECK(compare_local_links(cand(2.0, 2, 1, 4), cand(2.0, 2, 2, 4)) < 0);
  CHECK(compare_local_links(cand(2.0, 2, 1, 0x0004), cand(2.0, 2, 1, 0x0007)) < 0);
  CHECK(compare_local_links(cand(2.0, 2, 1, 4), cand(2.0, 2, 1, 4)) == 0);
}

TEST_CASE("folded path means drive selection") {
  // Oracle: mean{3,1,2} = 2.0, mean{2.5,2.5} = 2.5; higher mean wins.
  WireAel a = compute_ael_update(0, 0, wire_mah(3.0));
  a = compute_ael_update(a, 1, wire_mah(1.0));
  a = compute_ael_update(a, 2, wire_mah(2.0));
  WireAel b = compute_ael_update(0, 0, wire_mah(2.5));
  b = compute_ael_update(b, 1, wire_mah(2.5));
  CHECK(a == wire_mah(2.0));
  CHECK(b == wire_mah(2.5));
  CandidateLink ca = cand(0, 3, 0, 4), cb = cand(0, 2, 0, 9);
  ca.ael = a;
  cb.ael = b;
  CHECK(compare_local_links(cb, ca) < 0);
}

TEST_CASE("link break opens a repair session toward the second next hop") {
  NodeState node = upstream_with_route();
  const DataPacket pkt = make_packet(1, 8);
  Actions actions = lrabc::detect_link_break(node, Address{2}, pkt, 1000);

  REQUIRE(node.repair_sessions.size() == 1);
  const RepairSession& session = node.repair_sessions.begin()->second;
  CHECK(session.abandoned == Address{2});
  CHECK(session.second_next_hop == Address{3});
  CHECK(session.final_dest == Address{8});
  CHECK(session.phase == BeePhase::Scout);
  REQUIRE(session.buffered.size() == 1);

  const auto* open = first_action<ActionSessionOpen>(actions);
  REQUIRE(open != nullptr);
  CHECK(open->second_next_hop == Address{3});
  auto casts = actions_of<ActionBroadcast>(actions);
  REQUIRE(casts.size() == 1);
  const ControlMessage& msg = casts[0]->frame.msg;
  CHECK(msg.kind == MessageKind::LocalRREQ);
  CHECK(msg.hop_count == 0);
  CHECK(msg.dest == Address{3});
  CHECK(msg.second_next_hop == Address{3});
  CHECK(msg.originator == Address{1});
  CHECK(casts[0]->frame.relay_path == std::vector<Address>{Address{1}});
  CHECK(first_action<ActionStartTimer>(actions) != nullptr);
}

TEST_CASE("link break at the destination itself cannot be bypassed") {
  NodeState node = make_node(1);
  routing::install_route(node, Address{8}, Address{8}, NULL_ADDRESS, 1, 0, 0, 0);
  routing::install_route(node, Address{4}, Address{4}, NULL_ADDRESS, 1, 0, 0, 0);
  const DataPacket pkt = make_packet(4, 8);
  Actions actions = lrabc::detect_link_break(node, Address{8}, pkt, 0);
  CHECK(node.repair_sessions.empty());
  CHECK(drop_reason(actions) == DropReason::NodeUnreachable);
  auto unicasts = actions_of<ActionUnicast>(actions);
  REQUIRE(unicasts.size() == 1);
  CHECK(rerr_payload(unicasts[0]->frame.msg).error_code == RerrCode::NodeUnreachable);
}

TEST_CASE("second break during an active session buffers into it") {
  NodeState node = upstream_with_route();
  lrabc::detect_link_break(node, Address{2}, make_packet(1, 8, 0), 1000);
  Actions actions = lrabc::detect_link_break(node, Address{2}, make_packet(1, 8, 1), 2000);
  CHECK(first_action<ActionEnqueue>(actions) != nullptr);
  CHECK(node.repair_sessions.size() == 1);
  CHECK(node.repair_sessions.begin()->second.buffered.size() == 2);
}

TEST_CASE("scout relay: fold, increment, re-broadcast; duplicates and ttl drop") {
  NodeState node = make_node(9, Protocol::LRABC, 4.0);
  Frame frame;
  frame.msg.kind = MessageKind::LocalRREQ;
  frame.msg.hop_count = 0;
  frame.msg.ael = wire_mah(3.0);
  frame.msg.rreq_id = 5;
  frame.msg.dest = Address{3};
  frame.msg.originator = Address{1};
  frame.msg.second_next_hop = Address{3};
  frame.relay_path = {Address{1}};

  SUBCASE("first copy is re-broadcast with the path extended") {
    Actions actions = lrabc::handle_local_rreq(node, frame, Address{1}, 0);
    auto casts = actions_of<ActionBroadcast>(actions);
    REQUIRE(casts.size() == 1);
    CHECK(casts[0]->frame.msg.hop_count == 1);
    CHECK(casts[0]->frame.msg.ael == wire_mah(3.5));  // mean{3, 4}
    CHECK(casts[0]->frame.relay_path ==
          std::vector<Address>{Address{1}, Address{9}});
    const auto key = lrabc::flood_key(Address{1}, 5);
    REQUIRE(node.participants.count(key) == 1);
    CHECK(node.participants.at(key).phase == BeePhase::Scout);
  }

  SUBCASE("identical copy is dropped as a duplicate") {
    lrabc::handle_local_rreq(node, frame, Address{1}, 0);
    Actions again = lrabc::handle_local_rreq(node, frame, Address{1}, 1);
    CHECK(drop_reason(again) == DropReason::Duplicate);
  }

  SUBCASE("a copy that already visited this node is dropped") {
    frame.relay_path = {Address{1}, Address{9}, Address{4}};
    frame.msg.hop_count = 2;
    Actions actions = lrabc::handle_local_rreq(node, frame, Address{4}, 0);
    CHECK(drop_reason(actions) == DropReason::Duplicate);
  }

  SUBCASE("ttl exhaustion drops the copy") {
    frame.msg.hop_count = node.params.local_ttl;  // next hop would exceed
    frame.relay_path = {Address{1}, Address{4}, Address{5}};
    Actions actions = lrabc::handle_local_rreq(node, frame, Address{5}, 0);
    CHECK(drop_reason(actions) == DropReason::LocalTtl);
  }
}

TEST_CASE("second next hop batches copies and answers each path once") {
  NodeState node = make_node(3, Protocol::LRABC, 6.0);
  Frame frame;
  frame.msg.kind = MessageKind::LocalRREQ;
  frame.msg.hop_count = 1;
  frame.msg.ael = wire_mah(3.5);
  frame.msg.rreq_id = 5;
  frame.msg.dest = Address{3};
  frame.msg.originator = Address{1};
  frame.msg.second_next_hop = Address{3};
  frame.relay_path = {Address{1}, Address{9}};

  Actions first = lrabc::handle_local_rreq(node, frame, Address{9}, 0);
  const auto* timer = first_action<ActionStartTimer>(first);
  REQUIRE(timer != nullptr);
  CHECK(timer->kind == TimerKind::SnhWindow);

  Frame second = frame;
  second.relay_path = {Address{1}, Address{4}};
  CHECK(lrabc::handle_local_rreq(node, second, Address{4}, 100).empty());

  // same path again: duplicate
  Actions dup = lrabc::handle_local_rreq(node, frame, Address{9}, 200);
  CHECK(drop_reason(dup) == DropReason::Duplicate);

  Actions replies = lrabc::on_snh_window_close(node, timer->key, 10'000);
  auto unicasts = actions_of<ActionUnicast>(replies);
  REQUIRE(unicasts.size() == 2);
  CHECK(unicasts[0]->to == Address{9});
  CHECK(unicasts[1]->to == Address{4});
  CHECK(unicasts[0]->frame.msg.kind == MessageKind::LocalRREP);
  CHECK(unicasts[0]->frame.msg.hop_count == 0);
  CHECK(unicasts[0]->frame.msg.ael == node.energy_level());
  CHECK(unicasts[0]->frame.msg.rrep_id != unicasts[1]->frame.msg.rrep_id);
  CHECK(unicasts[0]->frame.relay_path ==
        std::vector<Address>{Address{1}, Address{9}, Address{3}});

  // late copy after the window closed
  Frame late = frame;
  late.relay_path = {Address{1}, Address{7}};
  Actions after = lrabc::handle_local_rreq(node, late, Address{7}, 20'000);
  CHECK(drop_reason(after) == DropReason::WindowClosed);
}

TEST_CASE("anchor onlooker keeps the best candidate and discards worse ones") {
  NodeState node = upstream_with_route();
  lrabc::detect_link_break(node, Address{2}, make_packet(1, 8), 0);
  RepairSession& session = node.repair_sessions.begin()->second;

  Frame reply;
  reply.msg.kind = MessageKind::LocalRREP;
  reply.msg.hop_count = 1;
  reply.msg.rreq_id = session.rreq_id;
  reply.msg.rrep_id = 40;
  reply.msg.dest = Address{3};
  reply.msg.originator = Address{1};
  reply.msg.second_next_hop = Address{3};
  reply.msg.ael = wire_mah(4.0);  // mean{snh, relay} so far
  reply.relay_path = {Address{1}, Address{9}, Address{3}};
  reply.route_index = 0;

  Actions first = lrabc::handle_local_rrep(node, reply, Address{9}, 100);
  REQUIRE(session.best_link.has_value());
  CHECK(session.best_link->next_hop_toward_snh == Address{9});
  CHECK(session.best_link->hop_count == 2);
  // mean{4.0 (2 folds), own 3.0} = (4*2+3)/3
  CHECK(session.best_link->ael == compute_ael_update(wire_mah(4.0), 2, wire_mah(3.0)));
  CHECK(session.phase == BeePhase::Employed);
  CHECK(first_action<ActionCandidateUpdate>(first) != nullptr);
  const auto* shift = first_action<ActionPhaseShift>(first);
  REQUIRE(shift != nullptr);
  CHECK(shift->to == BeePhase::Employed);

  Frame worse = reply;
  worse.msg.rrep_id = 41;
  worse.msg.ael = wire_mah(1.0);
  worse.relay_path = {Address{1}, Address{4}, Address{3}};
  Actions second = lrabc::handle_local_rrep(node, worse, Address{4}, 200);
  CHECK(drop_reason(second) == DropReason::WorseCandidate);
  CHECK(session.best_link->next_hop_toward_snh == Address{9});
}

TEST_CASE("reply with no matching session context is dropped") {
  NodeState node = make_node(6);
  Frame reply;
  reply.msg.kind = MessageKind::LocalRREP;
  reply.msg.rreq_id = 77;
  reply.msg.originator = Address{1};
  reply.msg.dest = Address{3};
  reply.relay_path = {Address{1}, Address{6}, Address{3}};
  reply.route_index = 1;
  Actions actions = lrabc::handle_local_rrep(node, reply, Address{3}, 0);
  CHECK(drop_reason(actions) == DropReason::NoSession);
}

TEST_CASE("intermediate onlooker folds, goes employed, relays toward the anchor") {
  NodeState node = make_node(9, Protocol::LRABC, 4.0);
  // participant context exists because this node relayed the request
  Frame req;
  req.msg.kind = MessageKind::LocalRREQ;
  req.msg.rreq_id = 5;
  req.msg.dest = Address{3};
  req.msg.originator = Address{1};
  req.msg.second_next_hop = Address{3};
  req.msg.ael = wire_mah(3.0);
  req.relay_path = {Address{1}};
  lrabc::handle_local_rreq(node, req, Address{1}, 0);

  Frame reply;
  reply.msg.kind = MessageKind::LocalRREP;
  reply.msg.hop_count = 0;
  reply.msg.rreq_id = 5;
  reply.msg.rrep_id = 9;
  reply.msg.dest = Address{3};
  reply.msg.originator = Address{1};
  reply.msg.second_next_hop = Address{3};
  reply.msg.ael = wire_mah(6.0);
  reply.relay_path = {Address{1}, Address{9}, Address{3}};
  reply.route_index = 1;

  Actions actions = lrabc::handle_local_rrep(node, reply, Address{3}, 100);
  const auto key = lrabc::flood_key(Address{1}, 5);
  CHECK(node.participants.at(key).phase == BeePhase::Employed);
  auto unicasts = actions_of<ActionUnicast>(actions);
  REQUIRE(unicasts.size() == 1);
  CHECK(unicasts[0]->to == Address{1});
  CHECK(unicasts[0]->frame.msg.hop_count == 1);
  CHECK(unicasts[0]->frame.msg.ael == wire_mah(5.0));  // mean{6, 4}
  CHECK(unicasts[0]->frame.route_index == 0);
  // route toward the second next hop learned from the reply leg
  RoutingEntry* entry = routing::route_lookup(node, Address{3}, 100);
  REQUIRE(entry != nullptr);
  CHECK(entry->next_hop == Address{3});
}

TEST_CASE("finalize: patch and flush on success") {
  NodeState node = upstream_with_route();
  lrabc::detect_link_break(node, Address{2}, make_packet(1, 8, 0), 0);
  lrabc::detect_link_break(node, Address{2}, make_packet(1, 8, 1), 10);
  RepairSession& session = node.repair_sessions.begin()->second;
  const std::uint32_t session_id = session.id;

  CandidateLink best = cand(4.0, 2, 0, 9);
  best.rrep_id = 12;
  best.path = {Address{1}, Address{9}, Address{3}};
  session.best_link = best;
  session.phase = BeePhase::Employed;

  Actions actions = lrabc::finalize_repair(node, session_id, 5000);
  auto unicasts = actions_of<ActionUnicast>(actions);
  REQUIRE(unicasts.size() == 2);
  CHECK(unicasts[0]->to == Address{9});
  CHECK(unicasts[0]->frame.data->seq == 0);
  CHECK(unicasts[1]->frame.data->seq == 1);
  CHECK(unicasts[0]->frame.relay_path == best.path);

  const auto* close = first_action<ActionSessionClose>(actions);
  REQUIRE(close != nullptr);
  CHECK(close->outcome == SessionOutcome::Success);
  CHECK(close->path == best.path);

  RoutingEntry* entry = routing::route_lookup(node, Address{8}, 5000);
  REQUIRE(entry != nullptr);
  CHECK(entry->next_hop == Address{9});
  CHECK(entry->second_next_hop == Address{3});
  CHECK(entry->hop_count == 7);  // 2 to the second next hop + 5 beyond it
  CHECK(entry->repair_path == best.path);
  CHECK(node.repair_sessions.empty());
}

TEST_CASE("finalize: retry then report failure") {
  NodeState node = upstream_with_route();
  lrabc::detect_link_break(node, Address{2}, make_packet(1, 8), 0);
  const std::uint32_t session_id = node.repair_sessions.begin()->second.id;

  SUBCASE("trials remain: one fresh broadcast") {
    Actions actions = lrabc::finalize_repair(node, session_id, 5000);
    auto casts = actions_of<ActionBroadcast>(actions);
    REQUIRE(casts.size() == 1);
    CHECK(casts[0]->frame.msg.kind == MessageKind::LocalRREQ);
    const RepairSession& session = node.repair_sessions.begin()->second;
    CHECK(session.trials_used == 2);
    CHECK(session.trial_rreq_ids.size() == 2);
    CHECK(session.trial_rreq_ids[0] != session.trial_rreq_ids[1]);
  }

  SUBCASE("trials exhausted: buffered packets dropped, error reported") {
    lrabc::finalize_repair(node, session_id, 5000);
    // make the originator someone else so the error leaves the node
    NodeState other = upstream_with_route();
    routing::install_route(other, Address{4}, Address{4}, NULL_ADDRESS, 1, 0, 0, 0);
    lrabc::detect_link_break(other, Address{2}, make_packet(4, 8), 0);
    const std::uint32_t sid = other.repair_sessions.begin()->second.id;
    lrabc::finalize_repair(other, sid, 5000);
    Actions final_actions = lrabc::finalize_repair(other, sid, 10'000);
    CHECK(other.repair_sessions.empty());
    CHECK(drop_reason(final_actions) == DropReason::RepairFailed);
    auto unicasts = actions_of<ActionUnicast>(final_actions);
    REQUIRE(unicasts.size() == 1);
    CHECK(unicasts[0]->frame.msg.kind == MessageKind::RERR);
    CHECK(rerr_payload(unicasts[0]->frame.msg).error_code == RerrCode::RepairFailed);
  }
}
