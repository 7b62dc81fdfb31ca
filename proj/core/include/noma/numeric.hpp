#pragma once

#include <algorithm>
#include <cmath>

namespace noma {

// Transmit powers in this library span ~15 orders of magnitude once path loss
// is applied, so power comparisons are relative with an absolute floor.
inline constexpr double kPowerRelTol = 1e-9;
inline constexpr double kPowerAbsFloorW = 1e-21;

inline bool nearly_equal(double a, double b, double rel = kPowerRelTol,
                         double abs_floor = kPowerAbsFloorW) {
  return std::abs(a - b) <=
         std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

inline double watts_to_dbm(double watts) {
  return 10.0 * std::log10(watts * 1000.0);
}

inline double dbm_to_watts(double dbm) {
  return std::pow(10.0, dbm / 10.0) / 1000.0;
}

}  // namespace noma
