// Fixed-point units used across the simulator: integer microsecond
// timestamps, integer nano-mAh energy, and the 8.8 fixed-point mAh
// representation energy levels take on the wire.
#ifndef SIXMESH_UNITS_HPP_
#define SIXMESH_UNITS_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sixmesh {

// Simulation time in integer microseconds. No floating time anywhere in
// protocol or engine state; doubles appear only in derived metrics.
using SimTime = std::int64_t;

constexpr SimTime US_PER_SECOND = 1'000'000;

inline SimTime seconds_to_time(double s) {
  return static_cast<SimTime>(std::llround(s * static_cast<double>(US_PER_SECOND)));
}

inline double time_to_seconds(SimTime t) {
  return static_cast<double>(t) / static_cast<double>(US_PER_SECOND);
}

// Energy in integer nano-milliamp-hours (1 mAh == 1e9 units). Keeps battery
// accounting exact so conservation checks can compare with ==.
using Energy = std::int64_t;

constexpr Energy NANO_PER_MAH = 1'000'000'000;

inline Energy mah_to_energy(double mah) {
  return static_cast<Energy>(std::llround(mah * static_cast<double>(NANO_PER_MAH)));
}

inline double energy_to_mah(Energy e) {
  return static_cast<double>(e) / static_cast<double>(NANO_PER_MAH);
}

// Wire representation of an energy level: unsigned 8.8 fixed-point mAh
// (1 ulp == 1/256 mAh), saturating at 255.996 mAh.
using WireAel = std::uint16_t;

inline WireAel energy_to_wire_ael(Energy e) {
  if (e <= 0) return 0;
  // round to nearest 1/256 mAh
  const __int128 num = static_cast<__int128>(e) * 256 + NANO_PER_MAH / 2;
  const __int128 raw = num / NANO_PER_MAH;
  return raw > 0xFFFF ? 0xFFFF : static_cast<WireAel>(raw);
}

inline Energy wire_ael_to_energy(WireAel a) {
  return static_cast<Energy>(a) * (NANO_PER_MAH / 256);
}

inline double wire_ael_to_mah(WireAel a) { return static_cast<double>(a) / 256.0; }

// Exact reduced fraction, used by the closed-form repair-energy analysis.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) { num = -num; den = -den; }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::string str() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
  }
};

}  // namespace sixmesh

#endif  // SIXMESH_UNITS_HPP_
