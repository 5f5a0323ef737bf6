#include "sixmesh/energy.hpp"

#include <stdexcept>

namespace sixmesh {

const char* charge_kind_name(ChargeKind k) {
  switch (k) {
    case ChargeKind::TxCtl: return "TxCtl";
    case ChargeKind::RxCtl: return "RxCtl";
    case ChargeKind::TxRep: return "TxRep";
    case ChargeKind::RxRep: return "RxRep";
    case ChargeKind::TxData: return "TxData";
    case ChargeKind::RxData: return "RxData";
    case ChargeKind::Idle: return "Idle";
  }
  return "?";
}

Energy charge_cost(const EnergyCosts& costs, ChargeKind kind, double idle_seconds) {
  switch (kind) {
    case ChargeKind::TxCtl: return costs.lrreq_tx;
    case ChargeKind::RxCtl: return costs.lrreq_rx;
    case ChargeKind::TxRep: return costs.lrrep_tx;
    case ChargeKind::RxRep: return costs.lrrep_rx;
    case ChargeKind::TxData: return costs.data_tx;
    case ChargeKind::RxData: return costs.data_rx;
    case ChargeKind::Idle:
      return static_cast<Energy>(static_cast<double>(costs.idle_per_second) * idle_seconds);
  }
  return 0;
}

ChargeResult charge(Battery& battery, const EnergyCosts& costs, ChargeKind kind,
                    double idle_seconds) {
  const Energy cost = charge_cost(costs, kind, idle_seconds);
  ChargeResult result;
  if (cost >= battery.remaining) {
    result.drawn = battery.remaining;
    battery.remaining = 0;
    result.depleted = true;
    return result;
  }
  battery.remaining -= cost;
  result.drawn = cost;
  return result;
}

Energy analytic_repair_energy(RepairVariant, std::int64_t nd, Rational m, std::int64_t h,
                              const EnergyCosts& costs) {
  if (nd < 0 || h < 0 || m.num < 0)
    throw std::domain_error("analytic_repair_energy: negative parameter");
  // nd * (req_tx + m * req_rx): keep exact by dividing the m-product last.
  const __int128 req_rx_total =
      static_cast<__int128>(nd) * m.num * costs.lrreq_rx / m.den;
  const __int128 total = static_cast<__int128>(nd) * costs.lrreq_tx + req_rx_total +
                         static_cast<__int128>(h) * (costs.lrrep_tx + costs.lrrep_rx);
  return static_cast<Energy>(total);
}

RepairEnergyRatios repair_energy_ratios(const RepairEnergyParams& load,
                                        const RepairEnergyParams& lrabc) {
  if (load.nd <= 0 || load.h <= 0)
    throw std::domain_error("repair_energy_ratios: baseline parameters must be positive");
  return RepairEnergyRatios{Rational{lrabc.nd, load.nd}, Rational{lrabc.h, load.h}};
}

}  // namespace sixmesh
