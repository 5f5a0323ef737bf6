#include "sixmesh/trace.hpp"

#include <charconv>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sixmesh {

const char* protocol_name(Protocol p) { return p == Protocol::LOAD ? "load" : "lrabc"; }

const char* bee_phase_name(BeePhase p) {
  switch (p) {
    case BeePhase::Idle: return "Idle";
    case BeePhase::Scout: return "Scout";
    case BeePhase::Employed: return "Employed";
    case BeePhase::Onlooker: return "Onlooker";
  }
  return "?";
}

bool bee_phase_transition_allowed(BeePhase from, BeePhase to) {
  if (to == BeePhase::Idle) return true;  // session end from any phase
  if (from == BeePhase::Idle && to == BeePhase::Scout) return true;
  if (from == BeePhase::Scout && to == BeePhase::Employed) return true;
  if (from == BeePhase::Employed && to == BeePhase::Scout) return true;
  return false;
}

const char* drop_reason_name(DropReason r) {
  switch (r) {
    case DropReason::None: return "None";
    case DropReason::HopLimit: return "HopLimit";
    case DropReason::Duplicate: return "Duplicate";
    case DropReason::NoReverseRoute: return "NoReverseRoute";
    case DropReason::NoRoute: return "NoRoute";
    case DropReason::LocalTtl: return "LocalTtl";
    case DropReason::WorseCandidate: return "WorseCandidate";
    case DropReason::NoSession: return "NoSession";
    case DropReason::RepairFailed: return "RepairFailed";
    case DropReason::BufferOverflow: return "BufferOverflow";
    case DropReason::Loss: return "Loss";
    case DropReason::LinkLoss: return "LinkLoss";
    case DropReason::WindowClosed: return "WindowClosed";
    case DropReason::NodeUnreachable: return "NodeUnreachable";
    case DropReason::EndOfSim: return "EndOfSim";
  }
  return "?";
}

const char* timer_kind_name(TimerKind k) {
  switch (k) {
    case TimerKind::DiscoveryTimeout: return "DiscoveryTimeout";
    case TimerKind::RepairTimeout: return "RepairTimeout";
    case TimerKind::SnhWindow: return "SnhWindow";
    case TimerKind::LoadRepairDeadline: return "LoadRepairDeadline";
    case TimerKind::ParticipantExpire: return "ParticipantExpire";
  }
  return "?";
}

const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::RunInfo: return "RunInfo";
    case TraceKind::TopoNode: return "TopoNode";
    case TraceKind::TopoEdge: return "TopoEdge";
    case TraceKind::AppSend: return "AppSend";
    case TraceKind::Transmit: return "Transmit";
    case TraceKind::Receive: return "Receive";
    case TraceKind::Deliver: return "Deliver";
    case TraceKind::DropPkt: return "DropPkt";
    case TraceKind::DropMsg: return "DropMsg";
    case TraceKind::Enqueue: return "Enqueue";
    case TraceKind::TimerSet: return "TimerSet";
    case TraceKind::TimerFire: return "TimerFire";
    case TraceKind::NodeFail: return "NodeFail";
    case TraceKind::Charge: return "Charge";
    case TraceKind::PhaseShift: return "PhaseShift";
    case TraceKind::SessionOpen: return "SessionOpen";
    case TraceKind::SessionClose: return "SessionClose";
    case TraceKind::CandidateUpdate: return "CandidateUpdate";
    case TraceKind::RouteUpdate: return "RouteUpdate";
    case TraceKind::InFlightAtEnd: return "InFlightAtEnd";
    case TraceKind::NodeSummary: return "NodeSummary";
  }
  return "?";
}

TraceRecord& EventTrace::append(TraceRecord r) {
  r.idx = records_.size() + 1;  // 1-based so 0 can mean "no cause"
  records_.push_back(std::move(r));
  return records_.back();
}

namespace {

void write_record(std::ostream& out, const TraceRecord& r) {
  out << "k=" << trace_kind_name(r.kind) << " t=" << r.time << " i=" << r.idx
      << " n=" << r.node.value;
  if (r.peer.value) out << " peer=" << r.peer.value;
  if (r.has_msg) {
    const auto& m = r.msg;
    out << " mk=" << static_cast<int>(m.kind) << " hc=" << static_cast<int>(m.hop_count)
        << " ct=" << static_cast<int>(m.cost_type_ct) << " wl=" << static_cast<int>(m.weak_links_wl)
        << " ael=" << m.ael << " q=" << static_cast<int>(m.rreq_id)
        << " p=" << static_cast<int>(m.rrep_id) << " d=" << m.dest.value
        << " o=" << m.originator.value << " s=" << m.second_next_hop.value
        << " fl=" << ((m.flag_r ? 4 : 0) | (m.flag_d ? 2 : 0) | (m.flag_o ? 1 : 0));
  }
  if (r.has_pkt) out << " flow=" << r.flow << " seq=" << r.pkt_seq;
  if (r.tx_id) out << " tx=" << r.tx_id;
  if (r.cause_idx) out << " cause=" << r.cause_idx;
  if (r.session_id) out << " sess=" << r.session_id;
  if (r.attempt) out << " try=" << static_cast<int>(r.attempt);
  if (r.broadcast) out << " bc=1";
  if (r.drop_reason != DropReason::None)
    out << " why=" << static_cast<int>(r.drop_reason);
  if (r.kind == TraceKind::TimerSet || r.kind == TraceKind::TimerFire)
    out << " tk=" << static_cast<int>(r.timer_kind) << " key=" << r.timer_key;
  if (r.kind == TraceKind::NodeFail) out << " fc=" << static_cast<int>(r.fail_cause);
  if (r.kind == TraceKind::Charge)
    out << " ck=" << static_cast<int>(r.charge_kind) << " amt=" << r.amount;
  if (r.kind == TraceKind::NodeSummary || r.kind == TraceKind::TopoNode)
    out << " amt=" << r.amount;
  if (r.kind == TraceKind::PhaseShift)
    out << " pf=" << static_cast<int>(r.phase_from) << " pt=" << static_cast<int>(r.phase_to);
  if (r.kind == TraceKind::SessionClose) out << " out=" << static_cast<int>(r.outcome);
  if (r.t_ref) out << " tref=" << r.t_ref;
  if (r.weak) out << " weak=1";
  if (r.count) out << " cnt=" << r.count;
  if (!r.path.empty()) {
    out << " path=";
    for (std::size_t i = 0; i < r.path.size(); ++i) {
      if (i) out << ',';
      out << r.path[i].value;
    }
  }
  if (!r.note.empty()) out << " note=" << r.note;  // note is always the final key
  out << '\n';
}

std::int64_t parse_int(std::string_view v, const char* what) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::runtime_error(std::string("trace parse: bad integer for ") + what);
  return out;
}

TraceKind parse_kind(std::string_view v) {
  for (int k = 0; k <= static_cast<int>(TraceKind::NodeSummary); ++k) {
    if (v == trace_kind_name(static_cast<TraceKind>(k))) return static_cast<TraceKind>(k);
  }
  throw std::runtime_error("trace parse: unknown record kind");
}

}  // namespace

void EventTrace::write_text(std::ostream& out) const {
  for (const auto& r : records_) write_record(out, r);
}

std::string EventTrace::to_text() const {
  std::ostringstream out;
  write_text(out);
  return out.str();
}

EventTrace EventTrace::from_text(const std::string& text) {
  EventTrace trace;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    TraceRecord r;
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto space = rest.find(' ');
      std::string_view tok = rest.substr(0, space);
      std::string_view key = tok;
      std::string_view val;
      if (const auto eq = tok.find('='); eq != std::string_view::npos) {
        key = tok.substr(0, eq);
        val = tok.substr(eq + 1);
      }
      if (key == "note") {
        // note consumes the remainder of the line verbatim
        const auto at = line.size() - rest.size() + 5;
        r.note = line.substr(at);
        rest = {};
        break;
      }
      if (key == "k") r.kind = parse_kind(val);
      else if (key == "t") r.time = parse_int(val, "t");
      else if (key == "i") r.idx = static_cast<std::uint64_t>(parse_int(val, "i"));
      else if (key == "n") r.node = Address{static_cast<std::uint16_t>(parse_int(val, "n"))};
      else if (key == "peer") r.peer = Address{static_cast<std::uint16_t>(parse_int(val, "peer"))};
      else if (key == "mk") { r.has_msg = true; r.msg.kind = static_cast<MessageKind>(parse_int(val, "mk")); }
      else if (key == "hc") r.msg.hop_count = static_cast<std::uint8_t>(parse_int(val, "hc"));
      else if (key == "ct") r.msg.cost_type_ct = static_cast<std::uint8_t>(parse_int(val, "ct"));
      else if (key == "wl") r.msg.weak_links_wl = static_cast<std::uint8_t>(parse_int(val, "wl"));
      else if (key == "ael") r.msg.ael = static_cast<WireAel>(parse_int(val, "ael"));
      else if (key == "q") r.msg.rreq_id = static_cast<std::uint8_t>(parse_int(val, "q"));
      else if (key == "p") r.msg.rrep_id = static_cast<std::uint8_t>(parse_int(val, "p"));
      else if (key == "d") r.msg.dest = Address{static_cast<std::uint16_t>(parse_int(val, "d"))};
      else if (key == "o") r.msg.originator = Address{static_cast<std::uint16_t>(parse_int(val, "o"))};
      else if (key == "s") r.msg.second_next_hop = Address{static_cast<std::uint16_t>(parse_int(val, "s"))};
      else if (key == "fl") {
        const int f = static_cast<int>(parse_int(val, "fl"));
        r.msg.flag_r = (f & 4) != 0;
        r.msg.flag_d = (f & 2) != 0;
        r.msg.flag_o = (f & 1) != 0;
      }
      else if (key == "flow") { r.has_pkt = true; r.flow = static_cast<std::uint32_t>(parse_int(val, "flow")); }
      else if (key == "seq") r.pkt_seq = static_cast<std::uint32_t>(parse_int(val, "seq"));
      else if (key == "tx") r.tx_id = static_cast<std::uint64_t>(parse_int(val, "tx"));
      else if (key == "cause") r.cause_idx = static_cast<std::uint64_t>(parse_int(val, "cause"));
      else if (key == "sess") r.session_id = static_cast<std::uint32_t>(parse_int(val, "sess"));
      else if (key == "try") r.attempt = static_cast<std::uint8_t>(parse_int(val, "try"));
      else if (key == "bc") r.broadcast = parse_int(val, "bc") != 0;
      else if (key == "why") r.drop_reason = static_cast<DropReason>(parse_int(val, "why"));
      else if (key == "tk") r.timer_kind = static_cast<TimerKind>(parse_int(val, "tk"));
      else if (key == "key") r.timer_key = static_cast<std::uint64_t>(parse_int(val, "key"));
      else if (key == "fc") r.fail_cause = static_cast<FailCause>(parse_int(val, "fc"));
      else if (key == "ck") r.charge_kind = static_cast<ChargeKind>(parse_int(val, "ck"));
      else if (key == "amt") r.amount = parse_int(val, "amt");
      else if (key == "pf") r.phase_from = static_cast<BeePhase>(parse_int(val, "pf"));
      else if (key == "pt") r.phase_to = static_cast<BeePhase>(parse_int(val, "pt"));
      else if (key == "out") r.outcome = static_cast<SessionOutcome>(parse_int(val, "out"));
      else if (key == "tref") r.t_ref = parse_int(val, "tref");
      else if (key == "weak") r.weak = parse_int(val, "weak") != 0;
      else if (key == "cnt") r.count = static_cast<std::uint32_t>(parse_int(val, "cnt"));
      else if (key == "path") {
        std::string_view p = val;
        while (!p.empty()) {
          const auto comma = p.find(',');
          r.path.push_back(Address{static_cast<std::uint16_t>(parse_int(p.substr(0, comma), "path"))});
          if (comma == std::string_view::npos) break;
          p.remove_prefix(comma + 1);
        }
      }
      else throw std::runtime_error("trace parse: unknown key '" + std::string(key) + "'");
      if (space == std::string_view::npos) break;
      rest.remove_prefix(space + 1);
    }
    const std::uint64_t want_idx = r.idx;
    trace.append(std::move(r));
    if (trace.records().back().idx != want_idx)
      throw std::runtime_error("trace parse: record index out of sequence");
  }
  return trace;
}

}  // namespace sixmesh
