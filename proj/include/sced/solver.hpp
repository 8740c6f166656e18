#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sced/builder.hpp"

namespace sced {

struct ResourceDispatch {
  std::string id;
  bool is_ibr = false;
  double energy = 0.0;
  double pfr_ramp = 0.0;
  double pfr_droop = 0.0;
  double inertia = 0.0;
  double inertia_factor = 0.0;  // MW/(Hz/s); SGs report their fixed 2HS/f0
  double soc_end = 0.0;         // IBRs only
  double loss = 0.0;            // IBRs only
};

struct DispatchSolution {
  std::vector<ResourceDispatch> resources;
  double total_inertia = 0.0;
  double total_pfr_ramp = 0.0;
  double total_pfr_droop = 0.0;
  double largest_contingency = 0.0;
  double objective = 0.0;
  std::vector<double> x;  // full primal vector in problem order
};

struct DualSolution {
  double lambda_energy = 0.0;
  std::vector<double> lambda_k;  // contingency rows, resource order
  std::vector<std::string> resource_ids;
  double mu = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double delta = 0.0;
  double lambda_inertia = 0.0;
  double lambda_pfr_r = 0.0;
  double lambda_pfr_d = 0.0;
  std::vector<double> eq_multipliers;    // one per equality row
  std::vector<double> ineq_multipliers;  // one per inequality row, >= 0
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string_view to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  double seconds = 0.0;
  // Farkas-type ray (equality then inequality multipliers) when infeasible.
  std::optional<std::vector<double>> certificate;
};

struct SolveResult {
  DispatchSolution primal;
  DualSolution dual;
  SolveReport report;
};

/// Solves the dispatch problem. Throws PreconditionError for tol outside
/// [1e-10, 1e-4]; non-optimal outcomes are reported through report.status.
SolveResult solve(const ConicProblem& problem, double tol = 1e-8);

struct KktResiduals {
  double primal = 0.0;           // largest row or cone violation
  double dual = 0.0;             // stationarity and dual-cone violation
  double complementarity = 0.0;  // largest |slack * multiplier|
  double contingency_stationarity = 0.0;  // |sum lambda_k - mu - delta - gamma2/sqrt(dfnad)|
};

/// Throws PreconditionError when vector sizes do not match the problem.
KktResiduals kkt_residuals(const ConicProblem& problem, const DispatchSolution& primal,
                           const DualSolution& dual);

/// Objective value of an arbitrary point (without feasibility check).
double objective_value(const ConicProblem& problem, const std::vector<double>& x);

}  // namespace sced
