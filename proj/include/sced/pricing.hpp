#pragma once

#include <string>
#include <vector>

#include "sced/model.hpp"
#include "sced/solver.hpp"

namespace sced {

struct PriceSet {
  double system_lambda = 0.0;  // lambda^E, $/MW per interval
  std::vector<std::string> ids;
  std::vector<double> energy;  // per resource, lambda^E - lambda^k
  double inertia = 0.0;        // $/MW
  double pfr_ramp = 0.0;
  double pfr_droop = 0.0;
  std::vector<std::string> setter_ids;
};

/// Clearing prices from the multipliers of an optimal solve. Throws
/// PreconditionError when the contingency multipliers do not line up with
/// the resource ids.
PriceSet prices(const DualSolution& duals, const SystemParams& params);

/// Default setter threshold, scaled by the system lambda.
double setter_tolerance(const DualSolution& duals);

/// Resources whose contingency multiplier exceeds tol.
std::vector<std::string> contingency_setter(const DispatchSolution& primal,
                                            const DualSolution& duals, double tol);

}  // namespace sced
