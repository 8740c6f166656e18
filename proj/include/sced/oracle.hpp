#pragma once

#include <cstddef>
#include <vector>

#include "sced/builder.hpp"

namespace sced {

struct OracleResult {
  double objective = 0.0;
  std::vector<double> x;  // best grid point, in problem variable order
  std::size_t evaluated = 0;
};

/// Grid search over energy dispatches. For each grid point the IBR inertia
/// service is line-minimized and the remaining quantities are completed at
/// their cheapest feasible values. Returns an upper
/// bound on the optimum. Handles at most 3 resources and one IBR; throws
/// PreconditionError otherwise and InfeasibleError when no grid point is
/// feasible.
OracleResult brute_force_oracle(const Scenario& scenario, double grid_step,
                                const BuildOptions& options = {});

/// Largest constraint violation of x (rows and cone).
double max_violation(const ConicProblem& problem, const std::vector<double>& x);

}  // namespace sced
