#include <random>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace sixmesh;
using namespace sixmesh::test;
using routing::compute_ael_update;

TEST_CASE("ael update: single node average is the node's level") {
  CHECK(compute_ael_update(wire_mah(99.0), 0, wire_mah(5.0)) == wire_mah(5.0));
}

TEST_CASE("ael update: two-value mean") {
  CHECK(compute_ael_update(wire_mah(4.0), 1, wire_mah(2.0)) == wire_mah(3.0));
}

TEST_CASE("ael update: left fold over {3,1,2} gives 2.0") {
  // Oracle: brute-force mean of {3, 1, 2} = 2.0 exactly.
  WireAel ael = compute_ael_update(0, 0, wire_mah(3.0));
  ael = compute_ael_update(ael, 1, wire_mah(1.0));
  ael = compute_ael_update(ael, 2, wire_mah(2.0));
  CHECK(ael == wire_mah(2.0));
}

TEST_CASE("ael update: permutation independence within one ulp per fold") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<WireAel> levels;
    const std::size_t n = 2 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i)
      levels.push_back(static_cast<WireAel>(rng() % 4096));

    auto fold = [](const std::vector<WireAel>& v) {
      WireAel ael = 0;
      for (std::size_t i = 0; i < v.size(); ++i)
        ael = compute_ael_update(ael, static_cast<std::uint32_t>(i), v[i]);
      return ael;
    };
    const WireAel a = fold(levels);
    std::vector<WireAel> shuffled = levels;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng() % i]);
    const WireAel b = fold(shuffled);
    const int tolerance = static_cast<int>(n);  // one ulp per fold step
    CHECK(std::abs(int(a) - int(b)) <= tolerance);
  }
}

TEST_CASE("route discovery origination") {
  NodeState node = make_node(1);

  SUBCASE("empty table: one broadcast with zeroed counters") {
    Actions actions = routing::originate_route_discovery(node, Address{7}, 0);
    auto casts = actions_of<ActionBroadcast>(actions);
    REQUIRE(casts.size() == 1);
    const ControlMessage& msg = casts[0]->frame.msg;
    CHECK(msg.kind == MessageKind::RREQ);
    CHECK(msg.hop_count == 0);
    CHECK(msg.weak_links_wl == 0);
    CHECK(msg.dest == Address{7});
    CHECK(msg.originator == Address{1});
    CHECK(msg.ael == node.energy_level());
    CHECK(first_action<ActionStartTimer>(actions) != nullptr);
  }

  SUBCASE("second call while pending is a no-op") {
    routing::originate_route_discovery(node, Address{7}, 0);
    CHECK(routing::originate_route_discovery(node, Address{7}, 1).empty());
  }

  SUBCASE("existing valid route: no discovery") {
    routing::install_route(node, Address{7}, Address{2}, NULL_ADDRESS, 1, 0, 0, 0);
    CHECK(routing::originate_route_discovery(node, Address{7}, 0).empty());
  }
}

TEST_CASE("rreq handling") {
  NodeState node = make_node(5);
  ControlMessage rreq;
  rreq.kind = MessageKind::RREQ;
  rreq.hop_count = 3;
  rreq.ael = wire_mah(4.0);
  rreq.rreq_id = 9;
  rreq.dest = Address{5};
  rreq.originator = Address{1};

  SUBCASE("destination replies with a zero-hop rrep to the reverse hop") {
    Actions actions = routing::handle_rreq(node, rreq, Address{4}, 0);
    auto unicasts = actions_of<ActionUnicast>(actions);
    REQUIRE(unicasts.size() == 1);
    CHECK(unicasts[0]->to == Address{4});
    const ControlMessage& rep = unicasts[0]->frame.msg;
    CHECK(rep.kind == MessageKind::RREP);
    CHECK(rep.hop_count == 0);
    CHECK(rep.originator == Address{1});
    CHECK(rep.dest == Address{5});
    // reverse route installed toward the originator
    RoutingEntry* entry = routing::route_lookup(node, Address{1}, 0);
    REQUIRE(entry != nullptr);
    CHECK(entry->next_hop == Address{4});
    CHECK(entry->hop_count == 4);
  }

  SUBCASE("duplicate with equal cost is dropped") {
    routing::handle_rreq(node, rreq, Address{4}, 0);
    Actions again = routing::handle_rreq(node, rreq, Address{3}, 1);
    CHECK(drop_reason(again) == DropReason::Duplicate);
  }

  SUBCASE("strictly better duplicate is re-processed") {
    rreq.dest = Address{9};  // not us: forwarding path
    routing::handle_rreq(node, rreq, Address{4}, 0);
    ControlMessage better = rreq;
    better.hop_count = 1;
    Actions again = routing::handle_rreq(node, better, Address{3}, 1);
    auto casts = actions_of<ActionBroadcast>(again);
    REQUIRE(casts.size() == 1);
    CHECK(casts[0]->frame.msg.hop_count == 2);
  }

  SUBCASE("forwarding increments hop count and folds energy") {
    rreq.dest = Address{9};
    node.battery.remaining = mah_to_energy(2.0);
    Actions actions = routing::handle_rreq(node, rreq, Address{4}, 0);
    auto casts = actions_of<ActionBroadcast>(actions);
    REQUIRE(casts.size() == 1);
    CHECK(casts[0]->frame.msg.hop_count == 4);
    // mean over 5 nodes: (4.0 * 4 + 2.0) / 5 = 3.6
    CHECK(casts[0]->frame.msg.ael == wire_mah(3.6));
  }

  SUBCASE("hop limit reached at a forwarder") {
    rreq.dest = Address{9};
    rreq.hop_count = 31;
    rreq.weak_links_wl = 0;
    Actions actions = routing::handle_rreq(node, rreq, Address{4}, 0);
    CHECK(drop_reason(actions) == DropReason::HopLimit);
  }

  SUBCASE("weak incoming link increments the counter") {
    rreq.dest = Address{9};
    node.weak_neighbors.insert(4);
    Actions actions = routing::handle_rreq(node, rreq, Address{4}, 0);
    auto casts = actions_of<ActionBroadcast>(actions);
    REQUIRE(casts.size() == 1);
    CHECK(casts[0]->frame.msg.weak_links_wl == rreq.weak_links_wl + 1);
  }
}

TEST_CASE("rrep handling") {
  SUBCASE("originator flushes queued packets in FIFO order") {
    NodeState node = make_node(1);
    Actions d = routing::originate_route_discovery(node, Address{8}, 0);
    (void)d;
    node.pending[8].queue.push_back(make_packet(1, 8, 0));
    node.pending[8].queue.push_back(make_packet(1, 8, 1));
    node.pending[8].queue.push_back(make_packet(1, 8, 2));

    ControlMessage rrep;
    rrep.kind = MessageKind::RREP;
    rrep.hop_count = 6;
    rrep.dest = Address{8};
    rrep.originator = Address{1};
    rrep.rrep_id = 3;
    Actions actions = routing::handle_rrep(node, rrep, Address{2}, 10);
    auto unicasts = actions_of<ActionUnicast>(actions);
    REQUIRE(unicasts.size() == 3);
    for (std::uint32_t i = 0; i < 3; ++i) {
      CHECK(unicasts[i]->to == Address{2});
      REQUIRE(unicasts[i]->frame.is_data());
      CHECK(unicasts[i]->frame.data->seq == i);
    }
    CHECK(node.pending.count(8) == 0);
    RoutingEntry* entry = routing::route_lookup(node, Address{8}, 10);
    REQUIRE(entry != nullptr);
    CHECK(entry->hop_count == 7);
  }

  SUBCASE("intermediate forwards, installs the forward entry, piggybacks the next hop") {
    NodeState node = make_node(4);
    // reverse route toward the originator, learned from the request leg
    routing::install_route(node, Address{1}, Address{3}, NULL_ADDRESS, 3, 0, 0, 0);
    ControlMessage rrep;
    rrep.kind = MessageKind::RREP;
    rrep.hop_count = 2;
    rrep.ael = wire_mah(6.0);
    rrep.dest = Address{8};
    rrep.originator = Address{1};
    rrep.second_next_hop = Address{6};
    Actions actions = routing::handle_rrep(node, rrep, Address{5}, 0);
    auto unicasts = actions_of<ActionUnicast>(actions);
    REQUIRE(unicasts.size() == 1);
    CHECK(unicasts[0]->to == Address{3});
    CHECK(unicasts[0]->frame.msg.hop_count == 3);
    CHECK(unicasts[0]->frame.msg.second_next_hop == Address{5});

    RoutingEntry* entry = routing::route_lookup(node, Address{8}, 0);
    REQUIRE(entry != nullptr);
    CHECK(entry->next_hop == Address{5});
    CHECK(entry->second_next_hop == Address{6});
    CHECK(entry->hop_count == 3);
    // the reverse next hop rides the precursor list of the forward entry
    REQUIRE(entry->precursors.size() == 1);
    CHECK(entry->precursors[0] == Address{3});
  }

  SUBCASE("rrep without reverse state is dropped") {
    NodeState node = make_node(4);
    ControlMessage rrep;
    rrep.kind = MessageKind::RREP;
    rrep.dest = Address{8};
    rrep.originator = Address{1};
    Actions actions = routing::handle_rrep(node, rrep, Address{5}, 0);
    CHECK(drop_reason(actions) == DropReason::NoReverseRoute);
  }
}

TEST_CASE("route lookup") {
  NodeState node = make_node(2);

  SUBCASE("expired entries are invalidated") {
    routing::install_route(node, Address{9}, Address{3}, NULL_ADDRESS, 2, 0, 0, 0);
    CHECK(routing::route_lookup(node, Address{9}, 0) != nullptr);
    const SimTime past_expiry = node.params.route_lifetime + 1;
    CHECK(routing::route_lookup(node, Address{9}, past_expiry) == nullptr);
    CHECK(node.routes[9].valid == false);
  }

  SUBCASE("self lookup yields a synthetic zero-hop entry") {
    RoutingEntry* self = routing::route_lookup(node, Address{2}, 0);
    REQUIRE(self != nullptr);
    CHECK(self->hop_count == 0);
  }

  SUBCASE("valid entry is returned unchanged") {
    routing::install_route(node, Address{9}, Address{3}, NULL_ADDRESS, 2, 1, wire_mah(1.5), 0);
    RoutingEntry* entry = routing::route_lookup(node, Address{9}, 5);
    REQUIRE(entry != nullptr);
    CHECK(entry->next_hop == Address{3});
    CHECK(entry->weak_links == 1);
  }
}

TEST_CASE("rerr origination and forwarding") {
  NodeState node = make_node(4);
  routing::install_route(node, Address{1}, Address{3}, NULL_ADDRESS, 3, 0, 0, 0);

  SUBCASE("emission travels the reverse route and is rate limited") {
    Actions first = routing::emit_rerr(node, RerrCode::RepairFailed, Address{8}, Address{1}, 0);
    auto unicasts = actions_of<ActionUnicast>(first);
    REQUIRE(unicasts.size() == 1);
    CHECK(unicasts[0]->to == Address{3});
    CHECK(rerr_payload(unicasts[0]->frame.msg).error_code == RerrCode::RepairFailed);

    // within the rate window: silently discarded
    Actions second =
        routing::emit_rerr(node, RerrCode::RepairFailed, Address{8}, Address{1}, 500'000);
    CHECK(second.empty());

    // after the window
    Actions third =
        routing::emit_rerr(node, RerrCode::RepairFailed, Address{8}, Address{1}, 1'000'001);
    CHECK(actions_of<ActionUnicast>(third).size() == 1);
  }

  SUBCASE("arrival at the data originator invalidates the route") {
    NodeState src = make_node(1);
    routing::install_route(src, Address{8}, Address{2}, NULL_ADDRESS, 7, 0, 0, 0);
    RerrPayload payload{RerrCode::RepairFailed, Address{8}, Address{1}};
    Actions actions = routing::handle_rerr(src, make_rerr(payload, Address{4}), Address{2}, 0);
    (void)actions;
    CHECK(routing::route_lookup(src, Address{8}, 1) == nullptr);
  }
}
