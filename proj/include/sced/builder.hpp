#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sced/model.hpp"

namespace sced {

enum class VarKind {
  Energy,              // energy dispatch P^E_k
  PfrRamp,             // ramp PFR capacity
  PfrDroop,            // sustained droop PFR capacity
  Inertia,             // committed inertia service P^In_k
  InertiaFactor,       // D_j of an IBR (decision variable)
  StateOfCharge,       // end-of-interval SoC E_j
  Loss,                // storage loss epigraph
  Throughput,          // |P^E_j| epigraph
  PfrEnergy,           // energy reserved for PFR
  InertiaEnergy,       // energy reserved for inertia
  LargestContingency,  // Delta P^L
  TotalInertia,
  TotalPfrRamp,
  TotalPfrDroop,
};

std::string_view to_string(VarKind kind);

struct Variable {
  std::string name;
  VarKind kind;
  int resource = -1;  // -1 for system-wide variables
};

/// One label per constraint family of the dispatch formulation. Every row of a
/// ConicProblem carries exactly one of these.
enum class RowKind {
  PowerBalance,
  TotalInertiaDef,
  TotalPfrRampDef,
  TotalPfrDroopDef,
  Contingency,          // P^E_k <= Delta P^L
  ContingencyNonNeg,    // Delta P^L >= 0
  Rocof,                // P^In >= Delta P^L
  Qss,                  // P^PFR,d >= Delta P^L
  InertiaCommitment,    // P^In_k = D_k * rocof_max
  InertiaFactorBound,   // 0 <= D_j <= d_max
  InertiaEnergyDef,     // E^In_j = D_j * dfnad_max
  PfrEnergyDef,
  PfrNonNeg,
  PfrRampCap,
  PfrDroopCap,
  PfrDroopWithinRamp,
  SgPowerLimit,
  SgGovernorHeadroom,
  SgDroopHeadroom,
  IbrPowerLimit,
  IbrInertiaHeadroom,       // P^E + P^In <= pmax
  IbrCombinedHeadroom,      // P^E + alpha (P^PFR,r + P^In) <= pmax
  IbrRecoveryUpper,         // P^E + beta P^PFR,r - P^In/eta <= pmax
  IbrRecoveryFootroom,      // pmin <= P^E + beta P^PFR,r - P^In/eta
  IbrDroopHeadroom,         // P^E + P^PFR,d <= pmax
  IbrConservativeHeadroom,  // P^E + P^PFR,r + P^In <= pmax
  IbrFootroom,              // pmin <= P^E - P^In/eta
  EnergyReserveInitial,
  EnergyReserveEnd,
  SocDynamics,
  SocLimit,
  LossDischarge,
  LossCharge,
  ThroughputBound,
};

std::string_view to_string(RowKind kind);

/// Which event direction a row protects. Neutral rows are unchanged by the
/// direction mode.
enum class Leg { Neutral, Up, Down };

struct RowTag {
  RowKind kind;
  int resource = -1;
  Leg leg = Leg::Neutral;
  // Right-hand side of the mirrored row (the opposite power or SoC limit).
  double mirror_rhs = 0.0;
  // Reservation needed only for the recovery (re-absorption) leg; dropped in
  // positive-only mode.
  bool recovery = false;
};

struct LinearTerm {
  int var;
  double coeff;
};

/// sum(terms) == rhs for equalities, sum(terms) <= rhs for inequalities.
struct LinearRow {
  std::vector<LinearTerm> terms;
  double rhs = 0.0;
  RowTag tag;
};

struct AffineExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;
};

/// u * v >= w^2 with u, v >= 0.
struct RotatedCone {
  AffineExpr u;
  AffineExpr v;
  AffineExpr w;
};

/// Convex dispatch problem: minimize sum(quad_i x_i^2) + linear.x + constant
/// subject to the linear rows and the rotated cone.
struct ConicProblem {
  std::vector<Variable> variables;
  std::vector<double> quad;
  std::vector<double> linear;
  double constant = 0.0;
  std::vector<LinearRow> equalities;
  std::vector<LinearRow> inequalities;
  std::optional<RotatedCone> cone;

  SystemParams params;
  std::vector<std::string> resource_ids;  // SGs first, then IBRs
  std::size_t num_sgs = 0;
  Direction direction = Direction::Up;
  bool bidirectional = true;

  std::size_t num_vars() const { return variables.size(); }
  std::size_t num_resources() const { return resource_ids.size(); }
  bool is_ibr(int resource) const { return static_cast<std::size_t>(resource) >= num_sgs; }

  /// Index of the variable with this kind and resource; throws if absent.
  int index_of(VarKind kind, int resource = -1) const;
  std::optional<int> find(VarKind kind, int resource = -1) const;

  std::size_t count_rows(RowKind kind, Leg leg) const;
  std::size_t count_rows(RowKind kind) const;
};

struct BuildOptions {
  std::optional<Direction> direction;  // defaults to the scenario's mode
  bool bidirectional = true;           // false drops the recovery-leg rows
};

/// Assembles the co-optimized energy / inertia / PFR dispatch. Throws
/// InfeasibleError when the fleet cannot meet demand at all.
ConicProblem build(const Scenario& scenario, const BuildOptions& options = {});

/// Converts an Up-form problem to the requested direction. Down replaces every
/// direction-signed row by its mirror (service terms keep their sign, dispatch
/// and SoC terms flip, the opposite limit becomes the bound); UpDown keeps
/// both sets.
ConicProblem apply_direction(const ConicProblem& up_form, Direction mode);

/// Energy needed to hold a ramp-then-droop PFR commitment for one interval.
double pfr_energy_requirement(double pr, double pd, double t_pfr, double dt);

/// Energy an inertia provider may have to deliver down to the nadir limit.
double inertia_energy_requirement(double d, double dfnad);

/// Variables that appear in no row, no cone and not in the objective.
std::vector<int> orphan_variables(const ConicProblem& problem);

}  // namespace sced
