#include "sced/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "sced/error.hpp"

namespace sced {

double setter_tolerance(const DualSolution& duals) {
  return 1e-6 * std::max(1.0, std::abs(duals.lambda_energy));
}

std::vector<std::string> contingency_setter(const DispatchSolution& primal,
                                            const DualSolution& duals, double tol) {
  if (duals.lambda_k.size() != duals.resource_ids.size()) {
    throw PreconditionError("contingency multipliers do not match the resource ids");
  }
  if (!primal.resources.empty() && primal.resources.size() != duals.resource_ids.size()) {
    throw PreconditionError("dispatch and duals cover different resources");
  }
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < duals.lambda_k.size(); ++k) {
    if (duals.lambda_k[k] > tol) ids.push_back(duals.resource_ids[k]);
  }
  return ids;
}

PriceSet prices(const DualSolution& duals, const SystemParams& params) {
  if (duals.lambda_k.size() != duals.resource_ids.size()) {
    throw PreconditionError("prices: missing contingency multipliers");
  }
  if (!(params.rocof_max > 0.0) || !(params.t_pfr > 0.0)) {
    throw PreconditionError("prices: rocof_max and t_pfr must be positive");
  }
  PriceSet p;
  p.system_lambda = duals.lambda_energy;
  p.ids = duals.resource_ids;
  const double tol = setter_tolerance(duals);
  for (std::size_t k = 0; k < duals.lambda_k.size(); ++k) {
    p.energy.push_back(duals.lambda_energy - duals.lambda_k[k]);
    if (duals.lambda_k[k] > tol) p.setter_ids.push_back(duals.resource_ids[k]);
  }
  p.inertia = duals.mu + (duals.gamma3 - duals.gamma1) / (2.0 * params.rocof_max);
  p.pfr_ramp = (duals.gamma1 + duals.gamma3) / params.t_pfr;
  p.pfr_droop = duals.delta;
  return p;
}

}  // namespace sced
