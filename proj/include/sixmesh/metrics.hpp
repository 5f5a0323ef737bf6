// Pure metric computations over an event trace.
#ifndef SIXMESH_METRICS_HPP_
#define SIXMESH_METRICS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sixmesh/topology.hpp"
#include "sixmesh/trace.hpp"

namespace sixmesh {

struct MetricsReport {
  double pdr = 0;                      // delivered / sent application packets
  double throughput_bps = 0;           // delivered bits over the active window
  double avg_e2e_delay_s = 0;          // mean send-to-deliver span
  double avg_energy_total_mah = 0;     // total drawn / node count
  double avg_energy_per_delivered_mah = 0;
  std::uint32_t sent = 0;
  std::uint32_t delivered = 0;
  std::uint32_t repair_sessions = 0;
  double repair_success_ratio = 0;
  int max_repair_radius_hops = 0;
};

double compute_pdr(const EventTrace& trace);
double compute_throughput(const EventTrace& trace, std::uint16_t packet_size_bytes);
double compute_avg_delay(const EventTrace& trace);
// Returns {total drawn / node_count, total drawn / max(delivered, 1)} in mAh.
std::pair<double, double> compute_avg_energy(const EventTrace& trace, std::uint32_t node_count,
                                             std::uint32_t delivered);

// Session bookkeeping shared by metrics and validation.
struct RepairSessionInfo {
  Address upstream;
  Address abandoned;
  std::uint32_t session_id = 0;
  SimTime opened_at = 0;
  SimTime closed_at = 0;
  bool closed = false;
  SessionOutcome outcome = SessionOutcome::Failed;
  std::vector<std::uint8_t> trial_rreq_ids;
  std::vector<Address> winning_path;
  bool is_local_repair = false;  // LocalRREQ-based session
};

struct TraceOverview {
  Topology topo;                         // reconstructed from the trace header
  std::map<std::uint16_t, SimTime> fail_time;
  std::vector<RepairSessionInfo> sessions;
  std::map<std::string, std::string> run_info;
  std::uint32_t node_count = 0;
};

TraceOverview scan_trace(const EventTrace& trace);

// Maximum live-graph hop distance from the session upstream reached by any
// transmission or reception of that session's repair requests.
int repair_radius(const EventTrace& trace, const TraceOverview& overview,
                  const RepairSessionInfo& session);

MetricsReport compute_metrics(const EventTrace& trace, std::uint32_t node_count,
                              std::uint16_t packet_size_bytes);

}  // namespace sixmesh

#endif  // SIXMESH_METRICS_HPP_
