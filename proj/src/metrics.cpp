#include "sixmesh/metrics.hpp"

#include <algorithm>
#include <sstream>

namespace sixmesh {

double compute_pdr(const EventTrace& trace) {
  std::uint64_t sent = 0, delivered = 0;
  for (const auto& r : trace.records()) {
    if (r.kind == TraceKind::AppSend) ++sent;
    else if (r.kind == TraceKind::Deliver) ++delivered;
  }
  if (sent == 0) return 0.0;
  return static_cast<double>(delivered) / static_cast<double>(sent);
}

double compute_throughput(const EventTrace& trace, std::uint16_t packet_size_bytes) {
  std::uint64_t delivered = 0;
  std::optional<SimTime> first_send;
  SimTime last_delivery = 0;
  for (const auto& r : trace.records()) {
    if (r.kind == TraceKind::AppSend && !first_send) first_send = r.time;
    if (r.kind == TraceKind::Deliver) {
      ++delivered;
      last_delivery = std::max(last_delivery, r.time);
    }
  }
  if (delivered == 0 || !first_send || last_delivery <= *first_send) return 0.0;
  const double window_s = time_to_seconds(last_delivery - *first_send);
  return static_cast<double>(delivered) * packet_size_bytes * 8.0 / window_s;
}

double compute_avg_delay(const EventTrace& trace) {
  std::uint64_t delivered = 0;
  double total_s = 0;
  for (const auto& r : trace.records()) {
    if (r.kind != TraceKind::Deliver) continue;
    ++delivered;
    total_s += time_to_seconds(r.time - r.t_ref);
  }
  return delivered ? total_s / static_cast<double>(delivered) : 0.0;
}

std::pair<double, double> compute_avg_energy(const EventTrace& trace, std::uint32_t node_count,
                                             std::uint32_t delivered) {
  Energy total = 0;
  for (const auto& r : trace.records())
    if (r.kind == TraceKind::Charge) total += r.amount;
  const double total_mah = energy_to_mah(total);
  const double per_node = node_count ? total_mah / node_count : 0.0;
  const double per_pkt = total_mah / std::max<std::uint32_t>(delivered, 1);
  return {per_node, per_pkt};
}

namespace {

std::vector<std::uint8_t> parse_trials(const std::string& note) {
  std::vector<std::uint8_t> out;
  const auto pos = note.find("trials=");
  if (pos == std::string::npos) return out;
  std::istringstream in(note.substr(pos + 7));
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(static_cast<std::uint8_t>(std::stoi(tok)));
  }
  return out;
}

}  // namespace

TraceOverview scan_trace(const EventTrace& trace) {
  TraceOverview ov;
  std::vector<std::pair<std::uint16_t, std::uint16_t>> edges;
  std::set<std::pair<std::uint16_t, std::uint16_t>> weak;
  std::map<std::uint32_t, std::size_t> open_sessions;  // session id -> index

  for (const auto& r : trace.records()) {
    switch (r.kind) {
      case TraceKind::RunInfo: {
        std::istringstream in(r.note);
        std::string tok;
        while (std::getline(in, tok, ';')) {
          const auto eq = tok.find('=');
          if (eq != std::string::npos) ov.run_info[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        break;
      }
      case TraceKind::TopoNode:
        ++ov.node_count;
        break;
      case TraceKind::TopoEdge:
        edges.emplace_back(r.node.value, r.peer.value);
        if (r.weak) weak.insert({std::min(r.node.value, r.peer.value),
                                 std::max(r.node.value, r.peer.value)});
        break;
      case TraceKind::NodeFail:
        if (!ov.fail_time.count(r.node.value)) ov.fail_time[r.node.value] = r.time;
        break;
      case TraceKind::SessionOpen: {
        RepairSessionInfo s;
        s.upstream = r.node;
        s.abandoned = r.peer;
        s.session_id = r.session_id;
        s.opened_at = r.time;
        s.is_local_repair = !r.msg.second_next_hop.is_null();
        open_sessions[r.session_id] = ov.sessions.size();
        ov.sessions.push_back(std::move(s));
        break;
      }
      case TraceKind::SessionClose: {
        auto it = open_sessions.find(r.session_id);
        if (it == open_sessions.end()) break;
        RepairSessionInfo& s = ov.sessions[it->second];
        s.closed = true;
        s.closed_at = r.time;
        s.outcome = r.outcome;
        s.winning_path = r.path;
        s.trial_rreq_ids = parse_trials(r.note);
        break;
      }
      default: break;
    }
  }
  ov.topo = Topology::from_edges(edges, weak);
  return ov;
}

int repair_radius(const EventTrace& trace, const TraceOverview& overview,
                  const RepairSessionInfo& session) {
  const MessageKind kind = session.is_local_repair ? MessageKind::LocalRREQ : MessageKind::RREQ;
  int radius = 0;
  for (const auto& r : trace.records()) {
    if (r.kind != TraceKind::Transmit && r.kind != TraceKind::Receive) continue;
    if (!r.has_msg || r.msg.kind != kind) continue;
    if (r.msg.originator != session.upstream) continue;
    if (std::find(session.trial_rreq_ids.begin(), session.trial_rreq_ids.end(), r.msg.rreq_id) ==
        session.trial_rreq_ids.end())
      continue;
    const SimTime t = r.time;
    const auto alive = [&](Address a) {
      auto it = overview.fail_time.find(a.value);
      return it == overview.fail_time.end() || it->second > t;
    };
    const int d = overview.topo.hop_distance_if(session.upstream, r.node, alive);
    radius = std::max(radius, d);
  }
  return radius;
}

MetricsReport compute_metrics(const EventTrace& trace, std::uint32_t node_count,
                              std::uint16_t packet_size_bytes) {
  MetricsReport m;
  for (const auto& r : trace.records()) {
    if (r.kind == TraceKind::AppSend) ++m.sent;
    else if (r.kind == TraceKind::Deliver) ++m.delivered;
  }
  m.pdr = compute_pdr(trace);
  m.throughput_bps = compute_throughput(trace, packet_size_bytes);
  m.avg_e2e_delay_s = compute_avg_delay(trace);
  const auto [per_node, per_pkt] = compute_avg_energy(trace, node_count, m.delivered);
  m.avg_energy_total_mah = per_node;
  m.avg_energy_per_delivered_mah = per_pkt;

  const TraceOverview ov = scan_trace(trace);
  std::uint32_t successes = 0;
  for (const auto& s : ov.sessions) {
    ++m.repair_sessions;
    if (s.closed && s.outcome == SessionOutcome::Success) ++successes;
    m.max_repair_radius_hops = std::max(m.max_repair_radius_hops, repair_radius(trace, ov, s));
  }
  m.repair_success_ratio =
      m.repair_sessions ? static_cast<double>(successes) / m.repair_sessions : 0.0;
  return m;
}

}  // namespace sixmesh
