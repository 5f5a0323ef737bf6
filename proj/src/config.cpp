#include "sixmesh/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sixmesh {

ProtocolParams ScenarioConfig::protocol_params() const {
  ProtocolParams p;
  p.protocol = protocol;
  p.hop_limit = hop_limit;
  p.local_ttl = local_ttl;
  p.trial_limit = trial_limit;
  p.per_hop_delay = seconds_to_time(mac.per_hop_delay_s);
  p.route_lifetime = seconds_to_time(route_lifetime_s);
  p.rerr_rate_per_s = rerr_rate_per_s;
  p.buffer_capacity = buffer_capacity;
  return p;
}

void ScenarioConfig::validate() const {
  if (node_count < 2) throw std::invalid_argument("config: node_count must be >= 2");
  if (radio_range_m <= 0) throw std::invalid_argument("config: radio_range_m must be positive");
  if (area_m <= 0) throw std::invalid_argument("config: area_m must be positive");
  if (sim_duration_s <= 0) throw std::invalid_argument("config: sim_duration_s must be positive");
  if (hop_limit > 31) throw std::invalid_argument("config: hop_limit exceeds the 5-bit field");
  if (mac.per_hop_delay_s <= 0)
    throw std::invalid_argument("config: mac_per_hop_delay_s must be positive");
  if (rerr_rate_per_s <= 0) throw std::invalid_argument("config: rerr_rate_per_s must be positive");
  for (const auto& f : failures) {
    if (f.time_s < 0 || f.time_s > sim_duration_s)
      throw std::invalid_argument("config: scheduled failure outside the simulation window");
    if (f.node == 0 || f.node > node_count)
      throw std::invalid_argument("config: scheduled failure names an unknown node");
  }
  for (const auto& e : edges) {
    if (e.a == 0 || e.a > node_count || e.b == 0 || e.b > node_count || e.a == e.b)
      throw std::invalid_argument("config: edge names an unknown node");
  }
  for (const auto& f : flows) {
    if (!f.farthest && (f.src == 0 || f.src > node_count || f.dest == 0 || f.dest > node_count))
      throw std::invalid_argument("config: flow endpoint names an unknown node");
    if (f.interval_s < 0)
      throw std::invalid_argument("config: flow interval must be positive (0 = spread over run)");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for " + key);
  }
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer value for " + key);
  }
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(line_no) + " lacks '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "area_m") cfg.area_m = to_double(value, key);
    else if (key == "node_count") cfg.node_count = static_cast<std::uint16_t>(to_u64(value, key));
    else if (key == "radio_range_m") cfg.radio_range_m = to_double(value, key);
    else if (key == "sim_duration_s") cfg.sim_duration_s = to_double(value, key);
    else if (key == "packet_size_bytes")
      cfg.packet_size_bytes = static_cast<std::uint16_t>(to_u64(value, key));
    else if (key == "traffic_total") cfg.traffic_total = static_cast<std::uint32_t>(to_u64(value, key));
    else if (key == "seed") cfg.seed = to_u64(value, key);
    else if (key == "protocol") {
      if (value == "load") cfg.protocol = Protocol::LOAD;
      else if (value == "lrabc") cfg.protocol = Protocol::LRABC;
      else throw std::invalid_argument("config: protocol must be load or lrabc");
    } else if (key == "flow") {
      const auto parts = split_ws(value);
      FlowSpec flow;
      if (!parts.empty() && parts[0] == "farthest") {
        if (parts.size() != 3) throw std::invalid_argument("config: flow = farthest start interval");
        flow.farthest = true;
        flow.start_s = to_double(parts[1], key);
        flow.interval_s = to_double(parts[2], key);
      } else {
        if (parts.size() != 4)
          throw std::invalid_argument("config: flow = src dest start interval");
        flow.src = static_cast<std::uint16_t>(to_u64(parts[0], key));
        flow.dest = static_cast<std::uint16_t>(to_u64(parts[1], key));
        flow.start_s = to_double(parts[2], key);
        flow.interval_s = to_double(parts[3], key);
      }
      cfg.flows.push_back(flow);
    } else if (key == "fail") {
      const auto parts = split_ws(value);
      if (parts.size() != 2) throw std::invalid_argument("config: fail = node time_s");
      cfg.failures.push_back(
          FailureSpec{static_cast<std::uint16_t>(to_u64(parts[0], key)), to_double(parts[1], key)});
    } else if (key == "fail_auto") {
      cfg.auto_failures = static_cast<std::uint32_t>(to_u64(value, key));
    } else if (key == "edge") {
      const auto parts = split_ws(value);
      if (parts.size() != 2 && !(parts.size() == 3 && parts[2] == "weak"))
        throw std::invalid_argument("config: edge = a b [weak]");
      cfg.edges.push_back(EdgeSpec{static_cast<std::uint16_t>(to_u64(parts[0], key)),
                                   static_cast<std::uint16_t>(to_u64(parts[1], key)),
                                   parts.size() == 3});
    } else if (key == "battery_capacity_mah") cfg.battery_capacity_mah = to_double(value, key);
    else if (key == "node_battery") {
      const auto parts = split_ws(value);
      if (parts.size() != 2) throw std::invalid_argument("config: node_battery = id mah");
      cfg.node_batteries.emplace_back(static_cast<std::uint16_t>(to_u64(parts[0], key)),
                                      to_double(parts[1], key));
    }
    else if (key == "energy_lrreq_tx_mah") cfg.energy.lrreq_tx = mah_to_energy(to_double(value, key));
    else if (key == "energy_lrreq_rx_mah") cfg.energy.lrreq_rx = mah_to_energy(to_double(value, key));
    else if (key == "energy_lrrep_tx_mah") cfg.energy.lrrep_tx = mah_to_energy(to_double(value, key));
    else if (key == "energy_lrrep_rx_mah") cfg.energy.lrrep_rx = mah_to_energy(to_double(value, key));
    else if (key == "energy_data_tx_mah") cfg.energy.data_tx = mah_to_energy(to_double(value, key));
    else if (key == "energy_data_rx_mah") cfg.energy.data_rx = mah_to_energy(to_double(value, key));
    else if (key == "energy_idle_mah_per_s")
      cfg.energy.idle_per_second = mah_to_energy(to_double(value, key));
    else if (key == "mac_per_hop_delay_s") cfg.mac.per_hop_delay_s = to_double(value, key);
    else if (key == "mac_retry_limit") cfg.mac.retry_limit = static_cast<std::uint32_t>(to_u64(value, key));
    else if (key == "mac_contention_factor") cfg.mac.contention_factor = to_double(value, key);
    else if (key == "mac_loss_per_concurrent") cfg.mac.loss_per_concurrent = to_double(value, key);
    else if (key == "mac_loss_cap") cfg.mac.loss_cap = to_double(value, key);
    else if (key == "weak_link_fraction") cfg.mac.weak_link_fraction = to_double(value, key);
    else if (key == "hop_limit") cfg.hop_limit = static_cast<std::uint8_t>(to_u64(value, key));
    else if (key == "local_ttl") cfg.local_ttl = static_cast<std::uint8_t>(to_u64(value, key));
    else if (key == "trial_limit") cfg.trial_limit = static_cast<std::uint32_t>(to_u64(value, key));
    else if (key == "route_lifetime_s") cfg.route_lifetime_s = to_double(value, key);
    else if (key == "rerr_rate_per_s") cfg.rerr_rate_per_s = to_double(value, key);
    else if (key == "buffer_capacity") cfg.buffer_capacity = static_cast<std::uint32_t>(to_u64(value, key));
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out.setf(std::ios::fmtflags(0), std::ios::floatfield);
  out.precision(17);
  out << "area_m = " << cfg.area_m << '\n';
  out << "node_count = " << cfg.node_count << '\n';
  out << "radio_range_m = " << cfg.radio_range_m << '\n';
  out << "sim_duration_s = " << cfg.sim_duration_s << '\n';
  out << "packet_size_bytes = " << cfg.packet_size_bytes << '\n';
  out << "traffic_total = " << cfg.traffic_total << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "protocol = " << protocol_name(cfg.protocol) << '\n';
  for (const auto& f : cfg.flows) {
    if (f.farthest) out << "flow = farthest " << f.start_s << ' ' << f.interval_s << '\n';
    else out << "flow = " << f.src << ' ' << f.dest << ' ' << f.start_s << ' ' << f.interval_s << '\n';
  }
  for (const auto& f : cfg.failures) out << "fail = " << f.node << ' ' << f.time_s << '\n';
  if (cfg.auto_failures) out << "fail_auto = " << cfg.auto_failures << '\n';
  for (const auto& e : cfg.edges)
    out << "edge = " << e.a << ' ' << e.b << (e.weak ? " weak" : "") << '\n';
  out << "battery_capacity_mah = " << cfg.battery_capacity_mah << '\n';
  for (const auto& [id, mah] : cfg.node_batteries)
    out << "node_battery = " << id << ' ' << mah << '\n';
  out << "energy_lrreq_tx_mah = " << energy_to_mah(cfg.energy.lrreq_tx) << '\n';
  out << "energy_lrreq_rx_mah = " << energy_to_mah(cfg.energy.lrreq_rx) << '\n';
  out << "energy_lrrep_tx_mah = " << energy_to_mah(cfg.energy.lrrep_tx) << '\n';
  out << "energy_lrrep_rx_mah = " << energy_to_mah(cfg.energy.lrrep_rx) << '\n';
  out << "energy_data_tx_mah = " << energy_to_mah(cfg.energy.data_tx) << '\n';
  out << "energy_data_rx_mah = " << energy_to_mah(cfg.energy.data_rx) << '\n';
  out << "energy_idle_mah_per_s = " << energy_to_mah(cfg.energy.idle_per_second) << '\n';
  out << "mac_per_hop_delay_s = " << cfg.mac.per_hop_delay_s << '\n';
  out << "mac_retry_limit = " << cfg.mac.retry_limit << '\n';
  out << "mac_contention_factor = " << cfg.mac.contention_factor << '\n';
  out << "mac_loss_per_concurrent = " << cfg.mac.loss_per_concurrent << '\n';
  out << "mac_loss_cap = " << cfg.mac.loss_cap << '\n';
  out << "weak_link_fraction = " << cfg.mac.weak_link_fraction << '\n';
  out << "hop_limit = " << static_cast<int>(cfg.hop_limit) << '\n';
  out << "local_ttl = " << static_cast<int>(cfg.local_ttl) << '\n';
  out << "trial_limit = " << cfg.trial_limit << '\n';
  out << "route_lifetime_s = " << cfg.route_lifetime_s << '\n';
  out << "rerr_rate_per_s = " << cfg.rerr_rate_per_s << '\n';
  out << "buffer_capacity = " << cfg.buffer_capacity << '\n';
  return out.str();
}

}  // namespace sixmesh
