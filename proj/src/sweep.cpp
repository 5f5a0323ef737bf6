#include "sixmesh/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "sixmesh/sim.hpp"
#include "sixmesh/validate.hpp"

namespace sixmesh {

const char* const METRICS_CSV_HEADER =
    "protocol,traffic,seed_count,pdr,throughput_bps,delay_s,energy_total_mAh,"
    "energy_per_pkt_mAh,repair_radius";

namespace {

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Hop sequence of the first delivered packet of flow 0: the transmitting
// nodes in time order, first attempts only.
std::vector<Address> first_delivered_route(const EventTrace& trace) {
  std::optional<std::uint32_t> seq;
  for (const auto& r : trace.records()) {
    if (r.kind == TraceKind::Deliver && r.flow == 0) {
      seq = r.pkt_seq;
      break;
    }
  }
  std::vector<Address> route;
  if (!seq) return route;
  for (const auto& r : trace.records()) {
    if (r.kind != TraceKind::Transmit || !r.has_pkt) continue;
    if (r.flow != 0 || r.pkt_seq != *seq || r.attempt > 1) continue;
    if (route.empty() || !(route.back() == r.node)) route.push_back(r.node);
  }
  return route;
}

}  // namespace

ScenarioConfig resolve_auto_failures(const ScenarioConfig& config) {
  if (config.auto_failures == 0) return config;

  // The probe run injects breaks into whatever route the flow is actually
  // using at each instant (skipping victims whose loss would partition the
  // endpoints); the realized schedule then replays identically for both
  // protocols.
  ScenarioConfig probe = config;
  probe.failures.clear();
  probe.protocol = Protocol::LRABC;  // discovery is shared; either works
  Engine probe_engine(probe);
  probe_engine.run();

  ScenarioConfig resolved = config;
  resolved.auto_failures = 0;
  resolved.failures = probe_engine.realized_failures();
  return resolved;
}

SingleRun run_single(const ScenarioConfig& config) {
  SingleRun out;
  out.resolved = resolve_auto_failures(config);
  out.trace = run_scenario(out.resolved);
  out.metrics = compute_metrics(out.trace, config.node_count, config.packet_size_bytes);
  return out;
}

std::string metrics_csv_row(Protocol protocol, std::uint32_t traffic, std::uint32_t seed_count,
                            const MetricsReport& m) {
  std::ostringstream out;
  out << protocol_name(protocol) << ',' << traffic << ',' << seed_count << ',' << fmt(m.pdr)
      << ',' << fmt(m.throughput_bps) << ',' << fmt(m.avg_e2e_delay_s) << ','
      << fmt(m.avg_energy_total_mah, 8) << ',' << fmt(m.avg_energy_per_delivered_mah, 8) << ','
      << fmt(static_cast<double>(m.max_repair_radius_hops), 2);
  return out.str();
}

bool SweepResult::all_verdicts_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const TrendVerdict& v) { return v.pass; });
}

std::string SweepResult::csv() const {
  std::ostringstream out;
  out << METRICS_CSV_HEADER << '\n';
  for (const auto& cell : cells)
    out << metrics_csv_row(cell.protocol, cell.traffic, cell.seed_count, cell.mean) << '\n';
  return out.str();
}

namespace {

struct WorkItem {
  std::uint32_t traffic = 0;
  std::uint64_t seed = 0;
};

struct WorkResult {
  bool disconnected = false;
  MetricsReport load;
  MetricsReport lrabc;
  std::vector<std::string> violations;
};

WorkResult run_cell(const ScenarioConfig& base, const WorkItem& item, bool validate) {
  WorkResult out;
  ScenarioConfig cfg = base;
  cfg.traffic_total = item.traffic;
  cfg.seed = item.seed;
  try {
    cfg = resolve_auto_failures(cfg);
    for (Protocol protocol : {Protocol::LOAD, Protocol::LRABC}) {
      ScenarioConfig run_cfg = cfg;
      run_cfg.protocol = protocol;
      const EventTrace trace = run_scenario(run_cfg);
      MetricsReport metrics =
          compute_metrics(trace, run_cfg.node_count, run_cfg.packet_size_bytes);
      if (validate) {
        const ValidationReport report = validate_trace(trace);
        for (const auto& v : report.violations) {
          std::ostringstream msg;
          msg << protocol_name(protocol) << "/traffic=" << item.traffic
              << "/seed=" << item.seed << ": " << v;
          out.violations.push_back(msg.str());
        }
      }
      (protocol == Protocol::LOAD ? out.load : out.lrabc) = metrics;
    }
  } catch (const DisconnectedTopology&) {
    out.disconnected = true;
  }
  return out;
}

}  // namespace

SweepResult run_comparison_suite(const ScenarioConfig& base, const SweepOptions& options) {
  SweepOptions opts = options;
  if (opts.traffic_ladder.empty())
    for (std::uint32_t t = 200; t <= 1200; t += 100) opts.traffic_ladder.push_back(t);
  if (opts.seeds.empty())
    for (std::uint64_t s = 1; s <= 10; ++s) opts.seeds.push_back(s);

  std::vector<WorkItem> items;
  for (std::uint32_t traffic : opts.traffic_ladder)
    for (std::uint64_t seed : opts.seeds) items.push_back(WorkItem{traffic, seed});

  std::vector<WorkResult> results(items.size());
  const unsigned threads = std::max(1u, opts.threads);
  if (threads == 1) {
    for (std::size_t i = 0; i < items.size(); ++i)
      results[i] = run_cell(base, items[i], opts.validate_traces);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= items.size()) return;
          results[i] = run_cell(base, items[i], opts.validate_traces);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepResult sweep;
  sweep.runs = items.size() * 2;
  for (std::size_t i = 0; i < items.size(); ++i)
    for (const auto& v : results[i].violations) sweep.violations.push_back(v);

  // Aggregate means per (protocol, traffic) in deterministic order.
  for (Protocol protocol : {Protocol::LOAD, Protocol::LRABC}) {
    for (std::uint32_t traffic : opts.traffic_ladder) {
      CellStats cell;
      cell.protocol = protocol;
      cell.traffic = traffic;
      cell.excluded = traffic < 200;
      MetricsReport sum;
      int radius_sum = 0;
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].traffic != traffic) continue;
        if (results[i].disconnected) {
          ++cell.disconnected_seeds;
          continue;
        }
        const MetricsReport& m = protocol == Protocol::LOAD ? results[i].load : results[i].lrabc;
        sum.pdr += m.pdr;
        sum.throughput_bps += m.throughput_bps;
        sum.avg_e2e_delay_s += m.avg_e2e_delay_s;
        sum.avg_energy_total_mah += m.avg_energy_total_mah;
        sum.avg_energy_per_delivered_mah += m.avg_energy_per_delivered_mah;
        sum.sent += m.sent;
        sum.delivered += m.delivered;
        sum.repair_sessions += m.repair_sessions;
        sum.repair_success_ratio += m.repair_success_ratio;
        radius_sum += m.max_repair_radius_hops;
        ++cell.seed_count;
      }
      if (cell.seed_count) {
        const double n = cell.seed_count;
        cell.mean.pdr = sum.pdr / n;
        cell.mean.throughput_bps = sum.throughput_bps / n;
        cell.mean.avg_e2e_delay_s = sum.avg_e2e_delay_s / n;
        cell.mean.avg_energy_total_mah = sum.avg_energy_total_mah / n;
        cell.mean.avg_energy_per_delivered_mah = sum.avg_energy_per_delivered_mah / n;
        cell.mean.sent = sum.sent;
        cell.mean.delivered = sum.delivered;
        cell.mean.repair_sessions = sum.repair_sessions;
        cell.mean.repair_success_ratio = sum.repair_success_ratio / n;
        cell.mean.max_repair_radius_hops =
            static_cast<int>(static_cast<double>(radius_sum) / n + 0.5);
      }
      sweep.cells.push_back(std::move(cell));
    }
  }

  // Directional verdicts over the included ladder points.
  auto cell_of = [&](Protocol p, std::uint32_t traffic) -> const CellStats* {
    for (const auto& c : sweep.cells)
      if (c.protocol == p && c.traffic == traffic) return &c;
    return nullptr;
  };

  bool pdr_all = true, thr_all = true, delay_all = true, energy_all = true;
  double pdr_gap_sum = 0;
  int points = 0;
  std::ostringstream pdr_d, thr_d, delay_d, energy_d;
  for (std::uint32_t traffic : opts.traffic_ladder) {
    const CellStats* load = cell_of(Protocol::LOAD, traffic);
    const CellStats* lrabc = cell_of(Protocol::LRABC, traffic);
    if (!load || !lrabc || load->excluded || !load->seed_count || !lrabc->seed_count) continue;
    ++points;
    pdr_gap_sum += lrabc->mean.pdr - load->mean.pdr;
    if (!(lrabc->mean.pdr > load->mean.pdr)) {
      pdr_all = false;
      pdr_d << " t=" << traffic;
    }
    if (!(lrabc->mean.throughput_bps > load->mean.throughput_bps)) {
      thr_all = false;
      thr_d << " t=" << traffic;
    }
    if (!(lrabc->mean.avg_e2e_delay_s < load->mean.avg_e2e_delay_s)) {
      delay_all = false;
      delay_d << " t=" << traffic;
    }
    if (!(lrabc->mean.avg_energy_per_delivered_mah < load->mean.avg_energy_per_delivered_mah)) {
      energy_all = false;
      energy_d << " t=" << traffic;
    }
  }
  const double mean_gap = points ? pdr_gap_sum / points : 0.0;

  sweep.verdicts.push_back(TrendVerdict{
      "pdr-dominance", pdr_all && points > 0,
      pdr_all ? "lrabc > load at every ladder point" : "fails at" + pdr_d.str()});
  sweep.verdicts.push_back(TrendVerdict{
      "pdr-margin", mean_gap >= 0.10,
      "mean improvement " + fmt(mean_gap * 100.0, 2) + " percentage points (need >= 10)"});
  sweep.verdicts.push_back(TrendVerdict{
      "throughput-dominance", thr_all && points > 0,
      thr_all ? "lrabc > load at every ladder point" : "fails at" + thr_d.str()});
  sweep.verdicts.push_back(TrendVerdict{
      "delay-dominance", delay_all && points > 0,
      delay_all ? "lrabc < load at every ladder point" : "fails at" + delay_d.str()});
  sweep.verdicts.push_back(TrendVerdict{
      "energy-dominance", energy_all && points > 0,
      energy_all ? "lrabc < load per delivered packet at every ladder point"
                 : "fails at" + energy_d.str()});
  return sweep;
}

}  // namespace sixmesh
