// Batch experiment harness: runs both protocols over a traffic ladder and
// seed set, aggregates the four metrics per cell, renders the comparison
// CSV, and judges the directional trend verdicts.
#ifndef SIXMESH_SWEEP_HPP_
#define SIXMESH_SWEEP_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sixmesh/config.hpp"
#include "sixmesh/metrics.hpp"

namespace sixmesh {

// Resolves `fail_auto = N` into N concrete mid-route failures: a probe run
// without failures discovers the flow's route, and the scheduled victims are
// forwarders nearest the route middle, spread across the send window. The
// probe is deterministic, so both protocols face an identical schedule.
ScenarioConfig resolve_auto_failures(const ScenarioConfig& config);

struct CellStats {
  Protocol protocol = Protocol::LOAD;
  std::uint32_t traffic = 0;
  std::uint32_t seed_count = 0;
  MetricsReport mean;   // arithmetic mean over completed seeds
  bool excluded = false;  // below the trend threshold (traffic < 200)
  std::uint32_t disconnected_seeds = 0;
};

struct TrendVerdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SweepResult {
  std::vector<CellStats> cells;  // ordered: protocol, then traffic ascending
  std::vector<TrendVerdict> verdicts;
  std::vector<std::string> violations;  // trace validation findings
  std::uint64_t runs = 0;

  bool all_verdicts_pass() const;
  std::string csv() const;   // fixed schema, byte-stable
};

struct SweepOptions {
  std::vector<std::uint32_t> traffic_ladder;  // default 200..1200 step 100
  std::vector<std::uint64_t> seeds;           // default 1..10
  bool validate_traces = false;
  unsigned threads = 1;
};

SweepResult run_comparison_suite(const ScenarioConfig& base, const SweepOptions& options);

// Per-run convenience used by the CLI `run` verb and tests.
struct SingleRun {
  EventTrace trace;
  MetricsReport metrics;
  ScenarioConfig resolved;  // auto failures materialized
};
SingleRun run_single(const ScenarioConfig& config);

std::string metrics_csv_row(Protocol protocol, std::uint32_t traffic, std::uint32_t seed_count,
                            const MetricsReport& m);
extern const char* const METRICS_CSV_HEADER;

}  // namespace sixmesh

#endif  // SIXMESH_SWEEP_HPP_
