#include "sixmesh/validate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "sixmesh/lrabc.hpp"
#include "sixmesh/wire.hpp"

namespace sixmesh {

std::string ValidationReport::summary() const {
  std::ostringstream out;
  out << records_checked << " records, " << messages_checked << " messages, "
      << violations.size() << " violations";
  return out.str();
}

namespace {

struct FloodKey {
  std::uint16_t node;
  std::uint16_t orig;
  std::uint8_t id;
  friend bool operator<(const FloodKey& a, const FloodKey& b) {
    return std::tie(a.node, a.orig, a.id) < std::tie(b.node, b.orig, b.id);
  }
};

struct CostSeen {
  std::uint8_t hops;
  std::uint8_t wl;
  WireAel ael;
};

bool same_flood(const ControlMessage& a, const ControlMessage& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case MessageKind::RREQ:
    case MessageKind::LocalRREQ:
      return a.originator == b.originator && a.rreq_id == b.rreq_id;
    case MessageKind::RREP:
    case MessageKind::LocalRREP:
      return a.originator == b.originator && a.rrep_id == b.rrep_id && a.dest == b.dest;
    case MessageKind::RERR:
      return a.originator == b.originator && a.dest == b.dest;
    default:
      return false;
  }
}

std::string at(const TraceRecord& r) {
  std::ostringstream out;
  out << "[#" << r.idx << " t=" << r.time << " n=" << r.node.value << "]";
  return out.str();
}

}  // namespace

ValidationReport validate_trace(const EventTrace& trace) {
  ValidationReport report;
  const auto& recs = trace.records();
  report.records_checked = recs.size();
  auto fail = [&](const std::string& what) { report.violations.push_back(what); };

  const TraceOverview ov = scan_trace(trace);

  SimTime per_hop_delay = 0;
  SimTime rerr_period = US_PER_SECOND;
  int local_ttl = 3;
  if (auto it = ov.run_info.find("delay_us"); it != ov.run_info.end())
    per_hop_delay = std::stoll(it->second);
  if (auto it = ov.run_info.find("rerr_period_us"); it != ov.run_info.end())
    rerr_period = std::stoll(it->second);
  if (auto it = ov.run_info.find("ttl"); it != ov.run_info.end()) local_ttl = std::stoi(it->second);

  auto alive_at = [&](Address a, SimTime t) {
    auto it = ov.fail_time.find(a.value);
    return it == ov.fail_time.end() || it->second > t;
  };

  // --- single ordered pass ---
  SimTime prev_time = 0;
  std::map<FloodKey, std::vector<CostSeen>> rreq_rebroadcast_costs;
  std::map<FloodKey, std::set<std::vector<Address>>> local_rreq_paths;
  std::map<std::tuple<std::uint16_t, std::uint16_t, std::uint8_t>, BeePhase> phase;
  std::map<std::uint32_t, CandidateLink> session_best;
  std::map<std::uint16_t, SimTime> last_rerr_emit;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> pkt_state;  // 0 sent,1 resolved
  std::uint64_t sent = 0, delivered = 0, dropped = 0, in_flight = 0;
  std::map<std::uint16_t, Energy> charged;
  std::map<std::uint16_t, Energy> capacity, remaining;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<Address>> data_hops;

  for (const auto& r : recs) {
    if (r.time < prev_time) fail("timestamps decrease at " + at(r));
    prev_time = r.time;

    if (r.has_msg &&
        (r.kind == TraceKind::Transmit || r.kind == TraceKind::Receive ||
         r.kind == TraceKind::DropMsg)) {
      ++report.messages_checked;
      try {
        const auto bytes = encode_message(r.msg);
        const auto decoded = decode_message(bytes);
        if (!decoded.ok() || !(*decoded.message == r.msg))
          fail("codec round-trip mismatch at " + at(r));
      } catch (const InvariantViolation& e) {
        fail(std::string("unencodable traced message at ") + at(r) + ": " + e.what());
      }
    }

    switch (r.kind) {
      case TraceKind::Transmit: {
        if (!alive_at(r.node, r.time) &&
            !(ov.fail_time.count(r.node.value) && ov.fail_time.at(r.node.value) == r.time))
          fail("failed node transmits at " + at(r));

        if (r.cause_idx && r.cause_idx <= recs.size()) {
          const TraceRecord& cause = recs[r.cause_idx - 1];
          if (cause.kind == TraceKind::Receive && cause.has_msg && r.has_msg &&
              same_flood(cause.msg, r.msg)) {
            if (r.msg.hop_count != cause.msg.hop_count + 1)
              fail("hop count not incremented by one at " + at(r));
          }
        }

        if (r.has_msg && r.msg.kind == MessageKind::RREQ && r.broadcast &&
            r.cause_idx && r.cause_idx <= recs.size()) {
          const TraceRecord& cause = recs[r.cause_idx - 1];
          if (cause.kind == TraceKind::Receive && cause.has_msg &&
              cause.msg.kind == MessageKind::RREQ) {
            FloodKey key{r.node.value, r.msg.originator.value, r.msg.rreq_id};
            auto& seen = rreq_rebroadcast_costs[key];
            for (const CostSeen& prior : seen) {
              const bool better =
                  std::make_pair(cause.msg.hop_count, cause.msg.weak_links_wl) <
                      std::make_pair(prior.hops, prior.wl) ||
                  (cause.msg.hop_count == prior.hops &&
                   cause.msg.weak_links_wl == prior.wl && cause.msg.ael > prior.ael);
              if (!better) {
                fail("re-broadcast without strictly better duplicate at " + at(r));
                break;
              }
            }
            seen.push_back(CostSeen{cause.msg.hop_count, cause.msg.weak_links_wl, cause.msg.ael});
          }
        }

        if (r.has_msg && r.msg.kind == MessageKind::LocalRREQ && r.broadcast) {
          FloodKey key{r.node.value, r.msg.originator.value, r.msg.rreq_id};
          if (!local_rreq_paths[key].insert(r.path).second)
            fail("repair request re-broadcast along an already relayed path at " + at(r));
        }

        if (r.has_msg && r.msg.kind == MessageKind::LocalRREP && r.cause_idx &&
            r.cause_idx <= recs.size()) {
          const TraceRecord& cause = recs[r.cause_idx - 1];
          if (cause.kind == TraceKind::Receive && cause.has_msg &&
              cause.msg.kind == MessageKind::LocalRREP) {
            const auto key =
                std::make_tuple(r.node.value, r.msg.originator.value, r.msg.rreq_id);
            auto it = phase.find(key);
            if (it == phase.end() || it->second == BeePhase::Idle)
              fail("reply relayed from Idle phase at " + at(r));
          }
        }

        if (r.has_msg && r.msg.kind == MessageKind::RERR && r.msg.hop_count == 0 &&
            r.attempt <= 1) {
          auto it = last_rerr_emit.find(r.node.value);
          if (it != last_rerr_emit.end() && r.time - it->second < rerr_period)
            fail("RERR rate limit exceeded at " + at(r));
          last_rerr_emit[r.node.value] = r.time;
        }

        if (r.has_pkt && r.attempt <= 1) {
          auto& hops = data_hops[{r.flow, r.pkt_seq}];
          if (hops.empty() || !(hops.back() == r.node)) hops.push_back(r.node);
        }
        break;
      }
      case TraceKind::Receive: {
        if (!alive_at(r.node, r.time)) fail("failed node receives at " + at(r));
        if (r.tx_id && r.tx_id <= recs.size()) {
          const TraceRecord& tx = recs[r.tx_id - 1];
          if (tx.kind != TraceKind::Transmit)
            fail("receive references a non-transmit record at " + at(r));
          else if (r.time < tx.time + per_hop_delay)
            fail("reception precedes transmission plus per-hop delay at " + at(r));
        } else {
          fail("receive without transmit reference at " + at(r));
        }
        break;
      }
      case TraceKind::PhaseShift: {
        const auto key = std::make_tuple(r.node.value, r.peer.value, r.msg.rreq_id);
        const BeePhase from_recorded = r.phase_from;
        auto it = phase.find(key);
        const BeePhase current = it == phase.end() ? BeePhase::Idle : it->second;
        if (current != from_recorded)
          fail("phase shift from mismatched state at " + at(r));
        if (!bee_phase_transition_allowed(r.phase_from, r.phase_to))
          fail("illegal phase transition at " + at(r));
        if (r.phase_from == BeePhase::Scout && r.phase_to == BeePhase::Employed) {
          bool caused_by_reply = false;
          if (r.cause_idx && r.cause_idx <= recs.size()) {
            const TraceRecord& cause = recs[r.cause_idx - 1];
            caused_by_reply = cause.kind == TraceKind::Receive && cause.has_msg &&
                              cause.msg.kind == MessageKind::LocalRREP;
          }
          if (!caused_by_reply)
            fail("scout-to-employed without a reply receipt at " + at(r));
        }
        phase[key] = r.phase_to;
        break;
      }
      case TraceKind::CandidateUpdate: {
        CandidateLink cand;
        cand.ael = r.msg.ael;
        cand.hop_count = r.msg.hop_count;
        cand.wl = r.msg.weak_links_wl;
        cand.next_hop_toward_snh = r.msg.dest;
        auto it = session_best.find(r.session_id);
        if (it != session_best.end() && compare_local_links(cand, it->second) >= 0)
          fail("candidate fitness degraded at " + at(r));
        session_best[r.session_id] = cand;
        break;
      }
      case TraceKind::AppSend: {
        ++sent;
        if (!pkt_state.emplace(std::make_pair(r.flow, r.pkt_seq), 0).second)
          fail("duplicate application send at " + at(r));
        break;
      }
      case TraceKind::Deliver: {
        ++delivered;
        auto it = pkt_state.find({r.flow, r.pkt_seq});
        if (it == pkt_state.end()) fail("delivery without application send at " + at(r));
        else if (it->second != 0) fail("packet resolved twice at " + at(r));
        else it->second = 1;
        break;
      }
      case TraceKind::DropPkt: {
        ++dropped;
        auto it = pkt_state.find({r.flow, r.pkt_seq});
        if (it == pkt_state.end()) fail("drop without application send at " + at(r));
        else if (it->second != 0) fail("packet resolved twice at " + at(r));
        else it->second = 1;
        break;
      }
      case TraceKind::InFlightAtEnd: {
        ++in_flight;
        auto it = pkt_state.find({r.flow, r.pkt_seq});
        if (it == pkt_state.end()) fail("in-flight record without application send at " + at(r));
        else if (it->second != 0) fail("packet resolved twice at " + at(r));
        else it->second = 1;
        break;
      }
      case TraceKind::Charge:
        charged[r.node.value] += r.amount;
        break;
      case TraceKind::TopoNode:
        capacity[r.node.value] = r.amount;
        break;
      case TraceKind::NodeSummary:
        remaining[r.node.value] = r.amount;
        break;
      default:
        break;
    }
  }

  // --- conservation ---
  if (sent != delivered + dropped + in_flight) {
    std::ostringstream out;
    out << "packet conservation broken: sent=" << sent << " delivered=" << delivered
        << " dropped=" << dropped << " in_flight=" << in_flight;
    fail(out.str());
  }
  for (const auto& [flow_seq, state] : pkt_state) {
    if (state == 0) {
      std::ostringstream out;
      out << "packet never resolved: flow=" << flow_seq.first << " seq=" << flow_seq.second;
      fail(out.str());
    }
  }
  for (const auto& [node, cap] : capacity) {
    const Energy used = charged.count(node) ? charged.at(node) : 0;
    const Energy left = remaining.count(node) ? remaining.at(node) : cap;
    if (used + left != cap) {
      std::ostringstream out;
      out << "energy not conserved at node " << node << ": charged=" << used
          << " remaining=" << left << " capacity=" << cap;
      fail(out.str());
    }
  }

  // --- repair locality and bypass correctness ---
  for (const auto& session : ov.sessions) {
    if (!session.is_local_repair) continue;
    for (const auto& r : recs) {
      if (r.kind != TraceKind::Transmit || !r.has_msg) continue;
      if (r.msg.kind != MessageKind::LocalRREQ) continue;
      if (r.msg.originator != session.upstream) continue;
      if (std::find(session.trial_rreq_ids.begin(), session.trial_rreq_ids.end(),
                    r.msg.rreq_id) == session.trial_rreq_ids.end() &&
          session.closed)
        continue;
      const SimTime t = r.time;
      const int d = ov.topo.hop_distance_if(session.upstream, r.node,
                                            [&](Address a) { return alive_at(a, t); });
      if (d < 0 || d > local_ttl)
        fail("repair request transmitted outside the TTL radius at " + at(r));
    }
    if (session.closed && session.outcome == SessionOutcome::Success) {
      if (std::find(session.winning_path.begin(), session.winning_path.end(),
                    session.abandoned) != session.winning_path.end())
        fail("patched path traverses the abandoned node (session " +
             std::to_string(session.session_id) + ")");
      if (session.winning_path.empty() || !(session.winning_path.front() == session.upstream))
        fail("patched path does not start at the upstream node (session " +
             std::to_string(session.session_id) + ")");
    }
  }

  // --- loop freedom on failure-free runs ---
  if (ov.fail_time.empty()) {
    for (const auto& [flow_seq, hops] : data_hops) {
      std::set<std::uint16_t> seen;
      for (Address a : hops) {
        if (!seen.insert(a.value).second) {
          std::ostringstream out;
          out << "data path visits a node twice: flow=" << flow_seq.first
              << " seq=" << flow_seq.second << " node=" << a.value;
          fail(out.str());
          break;
        }
      }
    }
  }

  return report;
}

}  // namespace sixmesh
