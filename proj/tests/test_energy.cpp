#include <random>

#include "doctest.h"
#include "sixmesh/energy.hpp"

using namespace sixmesh;

namespace {

EnergyCosts unit_costs() {
  EnergyCosts c;
  c.lrreq_tx = c.lrreq_rx = c.lrrep_tx = c.lrrep_rx = 1;
  c.data_tx = c.data_rx = 2;
  c.idle_per_second = 0;
  return c;
}

}  // namespace

TEST_CASE("charge subtracts per-event cost") {
  Battery b{mah_to_energy(1.0), mah_to_energy(1.0)};
  EnergyCosts costs;
  costs.lrreq_tx = mah_to_energy(0.2);
  costs.lrreq_rx = mah_to_energy(0.2);
  auto r = charge(b, costs, ChargeKind::RxCtl);
  CHECK(!r.depleted);
  CHECK(b.remaining == mah_to_energy(0.8));
}

TEST_CASE("charge underflow depletes the node") {
  Battery b{mah_to_energy(1.0), mah_to_energy(0.1)};
  EnergyCosts costs;
  costs.lrreq_tx = mah_to_energy(0.2);
  auto r = charge(b, costs, ChargeKind::TxCtl);
  CHECK(r.depleted);
  CHECK(b.remaining == 0);
  CHECK(r.drawn == mah_to_energy(0.1));
}

TEST_CASE("idle drain is linear in elapsed time") {
  Battery b{mah_to_energy(1.0), mah_to_energy(1.0)};
  EnergyCosts costs;
  costs.idle_per_second = mah_to_energy(0.01);
  auto r = charge(b, costs, ChargeKind::Idle, 10.0);
  CHECK(!r.depleted);
  CHECK(r.drawn == mah_to_energy(0.1));
  CHECK(b.remaining == mah_to_energy(0.9));
}

TEST_CASE("analytic repair energy matches the scenario instantiation") {
  const EnergyCosts costs = unit_costs();
  // 9 * (1 + 2*1) + 7 * (1 + 1) == 41
  CHECK(analytic_repair_energy(RepairVariant::LOAD, 9, Rational{2, 1}, 7, costs) == 41);
  // 4 * (1 + 2*1) + 2 * (1 + 1) == 16
  CHECK(analytic_repair_energy(RepairVariant::LRABC, 4, Rational{2, 1}, 2, costs) == 16);
  CHECK(analytic_repair_energy(RepairVariant::LOAD, 0, Rational{2, 1}, 0, costs) == 0);
}

TEST_CASE("analytic repair energy handles fractional neighbour counts exactly") {
  EnergyCosts costs = unit_costs();
  costs.lrreq_rx = 4;
  // nd=3, m=3/2: 3*(1 + (3/2)*4) = 3*7 = 21, plus h=1: +2
  CHECK(analytic_repair_energy(RepairVariant::LOAD, 3, Rational{3, 2}, 1, costs) == 23);
}

TEST_CASE("analytic repair energy is monotone in every parameter") {
  std::mt19937_64 rng(777);
  const EnergyCosts base = unit_costs();
  for (int i = 0; i < 500; ++i) {
    const std::int64_t nd = static_cast<std::int64_t>(rng() % 50);
    const std::int64_t h = static_cast<std::int64_t>(rng() % 30);
    const Rational m{static_cast<std::int64_t>(rng() % 8), 1};
    EnergyCosts costs = base;
    costs.lrreq_tx = static_cast<Energy>(rng() % 1000);
    costs.lrreq_rx = static_cast<Energy>(rng() % 1000);
    costs.lrrep_tx = static_cast<Energy>(rng() % 1000);
    costs.lrrep_rx = static_cast<Energy>(rng() % 1000);
    const Energy e0 = analytic_repair_energy(RepairVariant::LOAD, nd, m, h, costs);

    CHECK(analytic_repair_energy(RepairVariant::LOAD, nd + 1, m, h, costs) >= e0);
    CHECK(analytic_repair_energy(RepairVariant::LOAD, nd, Rational{m.num + 1, 1}, h, costs) >= e0);
    CHECK(analytic_repair_energy(RepairVariant::LOAD, nd, m, h + 1, costs) >= e0);
    EnergyCosts bumped = costs;
    bumped.lrreq_tx += 1;
    bumped.lrreq_rx += 1;
    bumped.lrrep_tx += 1;
    bumped.lrrep_rx += 1;
    CHECK(analytic_repair_energy(RepairVariant::LOAD, nd, m, h, bumped) >= e0);
  }
}

TEST_CASE("repair energy ratios are exact rationals") {
  auto r = repair_energy_ratios({9, 7}, {4, 2});
  CHECK(r.broadcast_ratio == Rational{4, 9});
  CHECK(r.reply_ratio == Rational{2, 7});

  auto same = repair_energy_ratios({9, 7}, {9, 7});
  CHECK(same.broadcast_ratio == Rational{1, 1});
  CHECK(same.reply_ratio == Rational{1, 1});

  auto halves = repair_energy_ratios({10, 5}, {5, 1});
  CHECK(halves.broadcast_ratio == Rational{1, 2});
  CHECK(halves.reply_ratio == Rational{1, 5});

  CHECK_THROWS_AS(repair_energy_ratios({0, 7}, {4, 2}), std::domain_error);
}

TEST_CASE("rational arithmetic reduces and normalizes sign") {
  CHECK(Rational{6, 9} == Rational{2, 3});
  CHECK(Rational{-4, -8} == Rational{1, 2});
  CHECK(Rational{3, -6}.num == -1);
  CHECK(Rational{3, -6}.den == 2);
  CHECK(Rational{4, 9}.str() == "4/9");
  CHECK(Rational{8, 2}.str() == "4");
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}
