#include "doctest.h"
#include "test_helpers.hpp"

#include "sixmesh/load.hpp"

using namespace sixmesh;
using namespace sixmesh::test;

namespace {

NodeState upstream_with_routes() {
  NodeState node = make_node(2, Protocol::LOAD, 5.0);
  routing::install_route(node, Address{8}, Address{3}, Address{4}, 6, 0, 0, 0);  // forward
  routing::install_route(node, Address{1}, Address{1}, NULL_ADDRESS, 1, 0, 0, 0);  // reverse
  return node;
}

}  // namespace

TEST_CASE("rerr budget enforces the per-second rate") {
  RerrBudget budget;
  budget.period = US_PER_SECOND;
  CHECK(budget.try_consume(0));
  CHECK(!budget.try_consume(999'999));
  CHECK(budget.try_consume(1'000'000));
  CHECK(!budget.try_consume(1'500'000));
}

TEST_CASE("repair floods a request on behalf of the originator") {
  NodeState node = upstream_with_routes();
  const DataPacket pkt = make_packet(1, 8);
  Actions actions = load::detect_link_break(node, Address{3}, pkt, 1000);

  REQUIRE(node.load_sessions.size() == 1);
  const LoadRepairSession& session = node.load_sessions.begin()->second;
  CHECK(session.final_dest == Address{8});
  CHECK(session.data_originator == Address{1});
  CHECK(session.buffered.size() == 1);

  auto casts = actions_of<ActionBroadcast>(actions);
  REQUIRE(casts.size() == 1);
  const ControlMessage& msg = casts[0]->frame.msg;
  CHECK(msg.kind == MessageKind::RREQ);
  CHECK(msg.originator == Address{2});  // own address, not the data source
  CHECK(msg.dest == Address{8});        // destination kept
  CHECK(msg.hop_count == 0);
  const auto* timer = first_action<ActionStartTimer>(actions);
  REQUIRE(timer != nullptr);
  CHECK(timer->kind == TimerKind::LoadRepairDeadline);

  // further packets for the destination buffer into the session
  Actions more = routing::forward_data(node, make_packet(1, 8, 1), 2000);
  CHECK(first_action<ActionEnqueue>(more) != nullptr);
  CHECK(node.load_sessions.begin()->second.buffered.size() == 2);
}

TEST_CASE("completed repair flushes the buffer over the fresh route") {
  NodeState node = upstream_with_routes();
  load::detect_link_break(node, Address{3}, make_packet(1, 8, 0), 0);
  load::detect_link_break(node, Address{3}, make_packet(1, 8, 1), 10);
  const std::uint32_t session_id = node.load_sessions.begin()->second.id;

  // the reply re-validated the route via node 9
  routing::install_route(node, Address{8}, Address{9}, NULL_ADDRESS, 7, 0, 0, 100);
  Actions actions = load::complete_repair(node, session_id, 100);
  auto unicasts = actions_of<ActionUnicast>(actions);
  REQUIRE(unicasts.size() == 2);
  CHECK(unicasts[0]->to == Address{9});
  CHECK(unicasts[0]->frame.data->seq == 0);
  CHECK(unicasts[1]->frame.data->seq == 1);
  const auto* close = first_action<ActionSessionClose>(actions);
  REQUIRE(close != nullptr);
  CHECK(close->outcome == SessionOutcome::Success);
  CHECK(node.load_sessions.empty());
}

TEST_CASE("failed repair reports within the error budget") {
  NodeState node = upstream_with_routes();

  SUBCASE("budget available: one error toward the originator, buffer dropped") {
    load::detect_link_break(node, Address{3}, make_packet(1, 8), 0);
    const std::uint32_t session_id = node.load_sessions.begin()->second.id;
    Actions actions = load::handle_repair_failure(node, session_id, 700'000);
    CHECK(node.load_sessions.empty());
    CHECK(drop_reason(actions) == DropReason::RepairFailed);
    auto unicasts = actions_of<ActionUnicast>(actions);
    REQUIRE(unicasts.size() == 1);
    CHECK(unicasts[0]->to == Address{1});
    CHECK(unicasts[0]->frame.msg.kind == MessageKind::RERR);
  }

  SUBCASE("budget exhausted: silent discard") {
    node.rerr_budget.try_consume(0);  // burn the budget
    load::detect_link_break(node, Address{3}, make_packet(1, 8), 100);
    const std::uint32_t session_id = node.load_sessions.begin()->second.id;
    Actions actions = load::handle_repair_failure(node, session_id, 500'000);
    CHECK(drop_reason(actions) == DropReason::RepairFailed);
    CHECK(actions_of<ActionUnicast>(actions).empty());
  }

  SUBCASE("deadline after a completed repair is a no-op") {
    load::detect_link_break(node, Address{3}, make_packet(1, 8), 0);
    const std::uint32_t session_id = node.load_sessions.begin()->second.id;
    routing::install_route(node, Address{8}, Address{9}, NULL_ADDRESS, 7, 0, 0, 100);
    load::complete_repair(node, session_id, 100);
    CHECK(load::handle_repair_failure(node, session_id, 700'000).empty());
  }
}
