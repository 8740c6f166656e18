#pragma once

#include <array>

namespace case_study {

/// Printed results of the six-generator study: totals, prices and the
/// multipliers of the RoCoF, nadir and QSS rows.
struct Row {
  double h;
  bool bidirectional;
  double total_cost;
  double system_lambda;
  double inertia_price;
  double ramp_price;
  double droop_price;
  double mu;
  double gamma1;
  double gamma2;
  double gamma3;
  double delta;
};

inline constexpr std::array<Row, 4> kRows{{
    {5.0, false, 541.91, 3.40, 0.05, 0.05, 0.00, 0.0, 0.0979, 0.1695, 0.1957, 0.0},
    {5.0, true, 541.91, 3.40, 0.05, 0.05, 0.00, 0.0, 0.0979, 0.1695, 0.1958, 0.0},
    {1.0, false, 546.92, 3.61, 0.20, 0.16, 0.00, 0.0, 0.2697, 0.6095, 0.6665, 0.0},
    {1.0, true, 551.21, 3.71, 0.96, 0.37, 0.00, 0.0, 0.1465, 2.0535, 2.0587, 0.0},
}};

/// Low-inertia bidirectional dispatch of the storage unit.
inline constexpr double kStorageInertia = 33.43;
inline constexpr double kStorageEnergy = 37.14;

}  // namespace case_study
