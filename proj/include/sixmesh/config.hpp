// Scenario configuration: one `key = value` per line, `#` comments.
#ifndef SIXMESH_CONFIG_HPP_
#define SIXMESH_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sixmesh/energy.hpp"
#include "sixmesh/node_state.hpp"
#include "sixmesh/types.hpp"

namespace sixmesh {

struct FlowSpec {
  // When farthest is set the engine resolves src/dest to the pair of nodes
  // at maximum hop distance after building the topology.
  bool farthest = false;
  std::uint16_t src = 0;
  std::uint16_t dest = 0;
  double start_s = 10.0;
  double interval_s = 0.25;
};

struct FailureSpec {
  std::uint16_t node = 0;
  double time_s = 0;
};

struct EdgeSpec {
  std::uint16_t a = 0;
  std::uint16_t b = 0;
  bool weak = false;
};

struct MacConfig {
  double per_hop_delay_s = 0.010;
  std::uint32_t retry_limit = 3;
  double contention_factor = 0.1;      // delay multiplier per concurrent transmitter
  double loss_per_concurrent = 0.05;   // reception loss slope per concurrent transmitter
  double loss_cap = 0.4;
  double weak_link_fraction = 0.15;
};

struct ScenarioConfig {
  double area_m = 1500.0;
  std::uint16_t node_count = 50;
  double radio_range_m = 350.0;
  double sim_duration_s = 1020.0;
  std::uint16_t packet_size_bytes = 50;
  std::uint32_t traffic_total = 600;
  std::vector<FlowSpec> flows;
  std::vector<FailureSpec> failures;
  std::vector<EdgeSpec> edges;      // non-empty: explicit topology instead of random placement
  std::uint32_t auto_failures = 0;  // resolved to concrete mid-route failures by the harness
  std::uint64_t seed = 1;
  Protocol protocol = Protocol::LRABC;
  EnergyCosts energy;
  double battery_capacity_mah = 50.0;
  std::vector<std::pair<std::uint16_t, double>> node_batteries;  // per-node overrides
  MacConfig mac;

  std::uint8_t hop_limit = 31;
  std::uint8_t local_ttl = 3;
  std::uint32_t trial_limit = 2;
  double route_lifetime_s = 30.0;
  double rerr_rate_per_s = 1.0;
  std::uint32_t buffer_capacity = 32;

  ProtocolParams protocol_params() const;

  // Throws std::invalid_argument when a structural invariant fails
  // (node_count < 2, non-positive range, failure beyond sim end, ...).
  void validate() const;
};

ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);
std::string serialize_config(const ScenarioConfig& config);

}  // namespace sixmesh

#endif  // SIXMESH_CONFIG_HPP_
