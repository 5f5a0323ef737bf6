// Battery accounting and the closed-form repair-energy analysis used as an
// analytic oracle for the simulated repair cost.
#ifndef SIXMESH_ENERGY_HPP_
#define SIXMESH_ENERGY_HPP_

#include <cstdint>

#include "sixmesh/units.hpp"

namespace sixmesh {

// Per-operation charge costs, all in integer nano-mAh.
struct EnergyCosts {
  Energy lrreq_tx = mah_to_energy(0.002);  // broadcast one RREQ/LocalRREQ (RERR uses the same)
  Energy lrreq_rx = mah_to_energy(0.001);
  Energy lrrep_tx = mah_to_energy(0.002);  // transmit one RREP/LocalRREP
  Energy lrrep_rx = mah_to_energy(0.001);
  Energy data_tx = mah_to_energy(0.004);
  Energy data_rx = mah_to_energy(0.002);
  Energy idle_per_second = 0;

  friend bool operator==(const EnergyCosts&, const EnergyCosts&) = default;
};

enum class ChargeKind : std::uint8_t {
  TxCtl,   // RREQ / LocalRREQ / RERR transmission
  RxCtl,
  TxRep,   // RREP / LocalRREP transmission
  RxRep,
  TxData,
  RxData,
  Idle,
};

const char* charge_kind_name(ChargeKind k);

struct Battery {
  Energy capacity = mah_to_energy(50.0);
  Energy remaining = mah_to_energy(50.0);

  bool depleted() const { return remaining <= 0; }
};

struct ChargeResult {
  Energy drawn = 0;     // actually subtracted (never exceeds what was left)
  bool depleted = false;
};

// Draws one event's worth of charge. `idle_seconds` applies only to
// ChargeKind::Idle. A battery that cannot cover the cost is drained to zero
// and the node is reported depleted (it stops transmitting and receiving).
ChargeResult charge(Battery& battery, const EnergyCosts& costs, ChargeKind kind,
                    double idle_seconds = 0.0);

Energy charge_cost(const EnergyCosts& costs, ChargeKind kind, double idle_seconds = 0.0);

enum class RepairVariant : std::uint8_t { LOAD, LRABC };

// Closed-form energy for one local link repair:
//   nd * (E_req_tx + m * E_req_rx) + h * (E_rep_tx + E_rep_rx)
// where nd counts nodes that transmit and receive the repair request, m is
// the average number of forwarding neighbours, and h the hop count the
// reply traverses (upstream->destination for LOAD, upstream->second-next-hop
// for the local repair). Exact integer arithmetic; m may be fractional.
Energy analytic_repair_energy(RepairVariant variant, std::int64_t nd, Rational m,
                              std::int64_t h, const EnergyCosts& costs);

struct RepairEnergyParams {
  std::int64_t nd = 0;  // nodes transmitting/receiving the repair request
  std::int64_t h = 0;   // reply hop count
};

struct RepairEnergyRatios {
  Rational broadcast_ratio;  // nd_lrabc / nd_load
  Rational reply_ratio;      // h_lrabc / h_load
};

// pre: load.nd > 0 and load.h > 0
RepairEnergyRatios repair_energy_ratios(const RepairEnergyParams& load,
                                        const RepairEnergyParams& lrabc);

}  // namespace sixmesh

#endif  // SIXMESH_ENERGY_HPP_
