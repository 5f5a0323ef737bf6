#include "doctest.h"

#include "sixmesh/config.hpp"
#include "sixmesh/metrics.hpp"
#include "sixmesh/sweep.hpp"

using namespace sixmesh;

namespace {

EventTrace synthetic_trace(std::uint32_t sent, std::uint32_t delivered,
                           const std::vector<double>& delays_s, double first_send_s = 10.0) {
  EventTrace trace;
  {
    TraceRecord r;
    r.kind = TraceKind::RunInfo;
    r.note = "proto=lrabc;ttl=3;delay_us=10000;rerr_period_us=1000000";
    trace.append(std::move(r));
  }
  for (std::uint32_t i = 0; i < sent; ++i) {
    TraceRecord r;
    r.time = seconds_to_time(first_send_s + i);
    r.kind = TraceKind::AppSend;
    r.node = Address{1};
    r.has_pkt = true;
    r.flow = 0;
    r.pkt_seq = i;
    trace.append(std::move(r));
  }
  for (std::uint32_t i = 0; i < delivered; ++i) {
    TraceRecord r;
    r.kind = TraceKind::Deliver;
    r.node = Address{2};
    r.has_pkt = true;
    r.flow = 0;
    r.pkt_seq = i;
    r.t_ref = seconds_to_time(first_send_s + i);
    r.time = r.t_ref + seconds_to_time(i < delays_s.size() ? delays_s[i] : 1.0);
    trace.append(std::move(r));
  }
  return trace;
}

}  // namespace

TEST_CASE("pdr: delivered over sent") {
  CHECK(compute_pdr(synthetic_trace(1000, 886, {})) == doctest::Approx(0.886));
  CHECK(compute_pdr(synthetic_trace(0, 0, {})) == 0.0);
  CHECK(compute_pdr(synthetic_trace(50, 50, {})) == 1.0);
}

TEST_CASE("throughput: delivered bits over the send-to-last-delivery window") {
  CHECK(compute_throughput(synthetic_trace(0, 0, {}), 50) == 0.0);

  // 100 packets of 50 B; first send at t=10 s, last delivery at t=110 s.
  EventTrace trace;
  {
    TraceRecord r;
    r.kind = TraceKind::AppSend;
    r.time = seconds_to_time(10.0);
    r.has_pkt = true;
    r.flow = 0;
    r.pkt_seq = 0;
    trace.append(std::move(r));
  }
  for (std::uint32_t i = 0; i < 100; ++i) {
    TraceRecord r;
    r.kind = TraceKind::Deliver;
    r.time = seconds_to_time(110.0) - (99 - i);  // last lands exactly at 110 s
    r.t_ref = seconds_to_time(10.0);
    r.has_pkt = true;
    r.flow = 0;
    r.pkt_seq = i;
    trace.append(std::move(r));
  }
  CHECK(compute_throughput(trace, 50) == doctest::Approx(400.0));
}

TEST_CASE("average delay: mean over delivered, zero without deliveries") {
  CHECK(compute_avg_delay(synthetic_trace(2, 2, {1.0, 3.0})) == doctest::Approx(2.0));
  CHECK(compute_avg_delay(synthetic_trace(5, 0, {})) == 0.0);
}

TEST_CASE("average energy: per node and per delivered packet") {
  EventTrace trace;
  for (int i = 0; i < 5; ++i) {
    TraceRecord r;
    r.kind = TraceKind::Charge;
    r.node = Address{static_cast<std::uint16_t>(i + 1)};
    r.charge_kind = ChargeKind::TxData;
    r.amount = mah_to_energy(1.0);
    trace.append(std::move(r));
  }
  const auto [per_node, per_pkt] = compute_avg_energy(trace, 50, 100);
  CHECK(per_node == doctest::Approx(0.1));
  CHECK(per_pkt == doctest::Approx(0.05));

  const auto [zero_node, zero_pkt] = compute_avg_energy(EventTrace{}, 50, 0);
  CHECK(zero_node == 0.0);
  CHECK(zero_pkt == 0.0);
}

TEST_CASE("config parses, validates, and round-trips") {
  const std::string text =
      "# scenario\n"
      "area_m = 1500\n"
      "node_count = 50\n"
      "radio_range_m = 350\n"
      "sim_duration_s = 1020\n"
      "packet_size_bytes = 50\n"
      "traffic_total = 600\n"
      "seed = 7\n"
      "protocol = load\n"
      "flow = farthest 10.0 0.25\n"
      "fail_auto = 3\n"
      "mac_per_hop_delay_s = 0.01\n";
  ScenarioConfig cfg = parse_config(text);
  CHECK(cfg.node_count == 50);
  CHECK(cfg.protocol == Protocol::LOAD);
  CHECK(cfg.traffic_total == 600);
  REQUIRE(cfg.flows.size() == 1);
  CHECK(cfg.flows[0].farthest);
  CHECK(cfg.auto_failures == 3);
  cfg.validate();

  const ScenarioConfig reparsed = parse_config(serialize_config(cfg));
  CHECK(reparsed.node_count == cfg.node_count);
  CHECK(reparsed.seed == cfg.seed);
  CHECK(reparsed.flows.size() == cfg.flows.size());
  CHECK(reparsed.auto_failures == cfg.auto_failures);

  CHECK_THROWS_AS(parse_config("bogus_key = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("node_count\n"), std::invalid_argument);
  ScenarioConfig bad = cfg;
  bad.node_count = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  ScenarioConfig late_fail = cfg;
  late_fail.failures.push_back(FailureSpec{3, 5000.0});
  CHECK_THROWS_AS(late_fail.validate(), std::invalid_argument);
}

TEST_CASE("csv row formatting is stable") {
  MetricsReport m;
  m.pdr = 0.886;
  m.throughput_bps = 51.53397;
  m.avg_e2e_delay_s = 6.336789;
  m.avg_energy_total_mah = 0.1592224;
  m.avg_energy_per_delivered_mah = 0.0009;
  m.max_repair_radius_hops = 7;
  const std::string row = metrics_csv_row(Protocol::LRABC, 200, 10, m);
  CHECK(row ==
        "lrabc,200,10,0.886000,51.533970,6.336789,0.15922240,0.00090000,7.00");
  CHECK(std::string(METRICS_CSV_HEADER) ==
        "protocol,traffic,seed_count,pdr,throughput_bps,delay_s,energy_total_mAh,"
        "energy_per_pkt_mAh,repair_radius");
}
