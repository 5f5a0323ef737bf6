// Trace invariant checker: every protocol invariant that can be judged from
// a recorded run, applied to every trace the harness produces.
#ifndef SIXMESH_VALIDATE_HPP_
#define SIXMESH_VALIDATE_HPP_

#include <string>
#include <vector>

#include "sixmesh/metrics.hpp"
#include "sixmesh/trace.hpp"

namespace sixmesh {

struct ValidationReport {
  std::vector<std::string> violations;
  std::uint64_t records_checked = 0;
  std::uint64_t messages_checked = 0;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Checks, in one pass plus targeted scans:
//   - non-decreasing timestamps, receive causality (tx + per-hop delay)
//   - codec round-trip of every traced message
//   - hop-count monotonicity on forwarded requests/replies
//   - duplicate suppression (strictly-better rule) for request floods
//   - repair locality (request transmissions within the TTL of the upstream)
//   - bypass correctness for successful repairs
//   - candidate-fitness monotonicity per session
//   - bee-phase transition legality; replies never relayed from Idle
//   - RERR origination rate limiting
//   - per-flow packet conservation; delivery matching
//   - exact per-node energy conservation
//   - the dead stay silent after their failure time
//   - loop freedom of data paths on failure-free runs
ValidationReport validate_trace(const EventTrace& trace);

}  // namespace sixmesh

#endif  // SIXMESH_VALIDATE_HPP_
