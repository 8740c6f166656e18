#include "sced/builder.hpp"

#include <cmath>
#include <algorithm>

#include "sced/error.hpp"

namespace sced {

std::string_view to_string(VarKind kind) {
  switch (kind) {
    case VarKind::Energy: return "PE";
    case VarKind::PfrRamp: return "PFRr";
    case VarKind::PfrDroop: return "PFRd";
    case VarKind::Inertia: return "PIn";
    case VarKind::InertiaFactor: return "D";
    case VarKind::StateOfCharge: return "E";
    case VarKind::Loss: return "Loss";
    case VarKind::Throughput: return "Thr";
    case VarKind::PfrEnergy: return "EPFR";
    case VarKind::InertiaEnergy: return "EIn";
    case VarKind::LargestContingency: return "dPL";
    case VarKind::TotalInertia: return "PIn_total";
    case VarKind::TotalPfrRamp: return "PFRr_total";
    case VarKind::TotalPfrDroop: return "PFRd_total";
  }
  return "?";
}

std::string_view to_string(RowKind kind) {
  switch (kind) {
    case RowKind::PowerBalance: return "power_balance";
    case RowKind::TotalInertiaDef: return "total_inertia";
    case RowKind::TotalPfrRampDef: return "total_pfr_ramp";
    case RowKind::TotalPfrDroopDef: return "total_pfr_droop";
    case RowKind::Contingency: return "largest_contingency";
    case RowKind::ContingencyNonNeg: return "contingency_nonneg";
    case RowKind::Rocof: return "rocof";
    case RowKind::Qss: return "qss";
    case RowKind::InertiaCommitment: return "inertia_commitment";
    case RowKind::InertiaFactorBound: return "inertia_factor_bound";
    case RowKind::InertiaEnergyDef: return "inertia_energy";
    case RowKind::PfrEnergyDef: return "pfr_energy";
    case RowKind::PfrNonNeg: return "pfr_nonneg";
    case RowKind::PfrRampCap: return "pfr_ramp_cap";
    case RowKind::PfrDroopCap: return "pfr_droop_cap";
    case RowKind::PfrDroopWithinRamp: return "pfr_droop_within_ramp";
    case RowKind::SgPowerLimit: return "sg_power_limit";
    case RowKind::SgGovernorHeadroom: return "sg_governor_headroom";
    case RowKind::SgDroopHeadroom: return "sg_droop_headroom";
    case RowKind::IbrPowerLimit: return "ibr_power_limit";
    case RowKind::IbrInertiaHeadroom: return "ibr_inertia_headroom";
    case RowKind::IbrCombinedHeadroom: return "ibr_combined_headroom";
    case RowKind::IbrRecoveryUpper: return "ibr_recovery_upper";
    case RowKind::IbrRecoveryFootroom: return "ibr_recovery_footroom";
    case RowKind::IbrDroopHeadroom: return "ibr_droop_headroom";
    case RowKind::IbrConservativeHeadroom: return "ibr_conservative_headroom";
    case RowKind::IbrFootroom: return "ibr_footroom";
    case RowKind::EnergyReserveInitial: return "energy_reserve_initial";
    case RowKind::EnergyReserveEnd: return "energy_reserve_end";
    case RowKind::SocDynamics: return "soc_dynamics";
    case RowKind::SocLimit: return "soc_limit";
    case RowKind::LossDischarge: return "loss_discharge";
    case RowKind::LossCharge: return "loss_charge";
    case RowKind::ThroughputBound: return "throughput";
  }
  return "?";
}

std::optional<int> ConicProblem::find(VarKind kind, int resource) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i].kind == kind && variables[i].resource == resource) return static_cast<int>(i);
  }
  return std::nullopt;
}

int ConicProblem::index_of(VarKind kind, int resource) const {
  if (auto i = find(kind, resource)) return *i;
  throw PreconditionError("no variable " + std::string(to_string(kind)) + " for resource " +
                          std::to_string(resource));
}

std::size_t ConicProblem::count_rows(RowKind kind, Leg leg) const {
  std::size_t n = 0;
  for (const auto* rows : {&equalities, &inequalities}) {
    for (const auto& r : *rows) n += (r.tag.kind == kind && r.tag.leg == leg);
  }
  return n;
}

std::size_t ConicProblem::count_rows(RowKind kind) const {
  std::size_t n = 0;
  for (const auto* rows : {&equalities, &inequalities}) {
    for (const auto& r : *rows) n += (r.tag.kind == kind);
  }
  return n;
}

double pfr_energy_requirement(double pr, double pd, double t_pfr, double dt) {
  if (!(pd >= 0.0) || !(pd <= pr) || !(t_pfr >= 0.0) || !(t_pfr <= dt)) {
    throw PreconditionError("pfr_energy_requirement: needs 0 <= pd <= pr and t_pfr <= dt");
  }
  return 0.5 * t_pfr * pr + pd * (dt - t_pfr);
}

double inertia_energy_requirement(double d, double dfnad) {
  if (!(d >= 0.0) || !(dfnad > 0.0)) {
    throw PreconditionError("inertia_energy_requirement: needs d >= 0 and dfnad > 0");
  }
  return d * dfnad;
}

namespace {

class ProblemAssembler {
 public:
  explicit ProblemAssembler(ConicProblem& p) : p_(p) {}

  int add_var(VarKind kind, int resource, const std::string& owner) {
    std::string name(to_string(kind));
    if (!owner.empty()) name += "[" + owner + "]";
    p_.variables.push_back({std::move(name), kind, resource});
    p_.quad.push_back(0.0);
    p_.linear.push_back(0.0);
    return static_cast<int>(p_.variables.size()) - 1;
  }

  void eq(std::vector<LinearTerm> terms, double rhs, RowKind kind, int resource = -1) {
    p_.equalities.push_back({std::move(terms), rhs, RowTag{kind, resource}});
  }

  void le(std::vector<LinearTerm> terms, double rhs, RowKind kind, int resource = -1) {
    p_.inequalities.push_back({std::move(terms), rhs, RowTag{kind, resource}});
  }

  // Direction-signed row in its Up form, with the limit used by the mirror.
  void le_up(std::vector<LinearTerm> terms, double rhs, double mirror_rhs, RowKind kind,
             int resource, bool recovery = false) {
    p_.inequalities.push_back(
        {std::move(terms), rhs, RowTag{kind, resource, Leg::Up, mirror_rhs, recovery}});
  }

 private:
  ConicProblem& p_;
};

struct PfrVars {
  int ramp;
  int droop;
};

PfrVars add_pfr_block(ProblemAssembler& a, const SystemParams& p, int k, const std::string& id,
                      double droop_gain, double pmax) {
  const int pr = a.add_var(VarKind::PfrRamp, k, id);
  const int pd = a.add_var(VarKind::PfrDroop, k, id);
  const auto cap = pfr_capability(droop_gain, pmax, p.f0, p.dfnad_max, p.dfqss_max);
  a.le({{pr, -1.0}}, 0.0, RowKind::PfrNonNeg, k);
  a.le({{pd, -1.0}}, 0.0, RowKind::PfrNonNeg, k);
  a.le({{pr, 1.0}}, cap.pr_max, RowKind::PfrRampCap, k);
  a.le({{pd, 1.0}}, cap.pd_max, RowKind::PfrDroopCap, k);
  a.le({{pd, 1.0}, {pr, -1.0}}, 0.0, RowKind::PfrDroopWithinRamp, k);
  return {pr, pd};
}

ConicProblem build_up_form(const Scenario& s, bool bidirectional) {
  const SystemParams& p = s.params;
  ConicProblem prob;
  prob.params = p;
  prob.resource_ids = s.resource_ids();
  prob.num_sgs = s.sgs.size();
  prob.direction = Direction::Up;
  prob.bidirectional = bidirectional;
  ProblemAssembler a(prob);

  const int n_res = static_cast<int>(s.resource_count());
  std::vector<int> energy(n_res), inertia(n_res), ramp(n_res), droop(n_res);

  for (int i = 0; i < static_cast<int>(s.sgs.size()); ++i) {
    const SyncGenerator& g = s.sgs[i];
    const int k = i;
    energy[k] = a.add_var(VarKind::Energy, k, g.id);
    const PfrVars pfr = add_pfr_block(a, p, k, g.id, g.droop_gain, g.pmax);
    ramp[k] = pfr.ramp;
    droop[k] = pfr.droop;
    inertia[k] = a.add_var(VarKind::Inertia, k, g.id);

    prob.quad[energy[k]] = g.cost_a;
    prob.linear[energy[k]] = g.cost_b;
    prob.constant += g.cost_c;

    const InertiaParams in = sg_inertia_params(g.h, g.s_mva, p.f0, p.rocof_max);
    a.eq({{inertia[k], 1.0}}, in.p_in, RowKind::InertiaCommitment, k);

    a.le({{energy[k], 1.0}}, g.pmax, RowKind::SgPowerLimit, k);
    a.le({{energy[k], -1.0}}, -g.pmin, RowKind::SgPowerLimit, k);
    a.le_up({{energy[k], 1.0}, {pfr.ramp, 1.0}}, g.pgov_max, -g.pmin,
            RowKind::SgGovernorHeadroom, k);
    a.le_up({{energy[k], 1.0}, {pfr.droop, 1.0}}, g.pmax, -g.pmin, RowKind::SgDroopHeadroom,
            k);
  }

  for (int jj = 0; jj < static_cast<int>(s.ibrs.size()); ++jj) {
    const InverterResource& j = s.ibrs[jj];
    const int k = static_cast<int>(s.sgs.size()) + jj;
    energy[k] = a.add_var(VarKind::Energy, k, j.id);
    const PfrVars pfr = add_pfr_block(a, p, k, j.id, j.droop_gain, j.pmax);
    ramp[k] = pfr.ramp;
    droop[k] = pfr.droop;
    inertia[k] = a.add_var(VarKind::Inertia, k, j.id);
    const int d = a.add_var(VarKind::InertiaFactor, k, j.id);
    const int soc = a.add_var(VarKind::StateOfCharge, k, j.id);
    const int loss = a.add_var(VarKind::Loss, k, j.id);
    const int thr = a.add_var(VarKind::Throughput, k, j.id);
    const int e_pfr = a.add_var(VarKind::PfrEnergy, k, j.id);
    const int e_in = a.add_var(VarKind::InertiaEnergy, k, j.id);

    prob.linear[thr] = j.cost_energy;
    prob.linear[loss] = j.cost_energy;
    prob.linear[inertia[k]] = j.cost_inertia;
    prob.linear[pfr.ramp] = j.cost_pfr_r;
    prob.linear[pfr.droop] = j.cost_pfr_d;

    a.eq({{inertia[k], 1.0}, {d, -p.rocof_max}}, 0.0, RowKind::InertiaCommitment, k);
    a.le({{d, -1.0}}, 0.0, RowKind::InertiaFactorBound, k);
    a.le({{d, 1.0}}, j.d_max, RowKind::InertiaFactorBound, k);
    a.eq({{e_in, 1.0}, {d, -p.dfnad_max}}, 0.0, RowKind::InertiaEnergyDef, k);
    a.eq({{e_pfr, 1.0}, {pfr.ramp, -0.5 * p.t_pfr}, {pfr.droop, -(p.dt - p.t_pfr)}}, 0.0,
         RowKind::PfrEnergyDef, k);

    a.le({{energy[k], 1.0}}, j.pmax, RowKind::IbrPowerLimit, k);
    a.le({{energy[k], -1.0}}, -j.pmin, RowKind::IbrPowerLimit, k);

    const double inv_eta = 1.0 / j.eta;
    if (s.conservative_mode) {
      a.le_up({{energy[k], 1.0}, {pfr.ramp, 1.0}, {inertia[k], 1.0}}, j.pmax, -j.pmin,
              RowKind::IbrConservativeHeadroom, k);
      if (bidirectional) {
        a.le_up({{energy[k], -1.0}, {inertia[k], inv_eta}}, -j.pmin, j.pmax,
                RowKind::IbrFootroom, k, true);
      }
    } else {
      a.le_up({{energy[k], 1.0}, {inertia[k], 1.0}}, j.pmax, -j.pmin,
              RowKind::IbrInertiaHeadroom, k);
      a.le_up({{energy[k], 1.0}, {pfr.ramp, j.alpha}, {inertia[k], j.alpha}}, j.pmax, -j.pmin,
              RowKind::IbrCombinedHeadroom, k);
      if (bidirectional) {
        a.le_up({{energy[k], 1.0}, {pfr.ramp, j.beta}, {inertia[k], -inv_eta}}, j.pmax, -j.pmin,
                RowKind::IbrRecoveryUpper, k, true);
        a.le_up({{energy[k], -1.0}, {pfr.ramp, -j.beta}, {inertia[k], inv_eta}}, -j.pmin,
                j.pmax, RowKind::IbrRecoveryFootroom, k, true);
      }
      a.le_up({{energy[k], 1.0}, {pfr.droop, 1.0}}, j.pmax, -j.pmin, RowKind::IbrDroopHeadroom,
              k);
    }

    // Service energy is drawn through the discharge path, hence the 1/sqrt(eta).
    const double reserve = 1.0 / std::sqrt(j.eta);
    a.le_up({{e_pfr, reserve}, {e_in, reserve}}, j.e0 - j.emin, j.emax - j.e0,
            RowKind::EnergyReserveInitial, k);
    a.le_up({{e_pfr, reserve}, {e_in, reserve}, {soc, -1.0}}, -j.emin, j.emax,
            RowKind::EnergyReserveEnd, k);

    a.eq({{soc, 1.0}, {energy[k], p.dt}, {loss, p.dt}}, j.e0, RowKind::SocDynamics, k);
    a.le({{soc, 1.0}}, j.emax, RowKind::SocLimit, k);
    a.le({{soc, -1.0}}, -j.emin, RowKind::SocLimit, k);

    const double root_eta = std::sqrt(j.eta);
    a.le({{energy[k], 1.0 / root_eta - 1.0}, {loss, -1.0}}, 0.0, RowKind::LossDischarge, k);
    a.le({{energy[k], root_eta - 1.0}, {loss, -1.0}}, 0.0, RowKind::LossCharge, k);
    a.le({{energy[k], 1.0}, {thr, -1.0}}, 0.0, RowKind::ThroughputBound, k);
    a.le({{energy[k], -1.0}, {thr, -1.0}}, 0.0, RowKind::ThroughputBound, k);
    a.le({{thr, 1.0}}, std::max(std::abs(j.pmin), std::abs(j.pmax)), RowKind::ThroughputBound, k);
  }

  const int dpl = a.add_var(VarKind::LargestContingency, -1, "");
  const int p_in = a.add_var(VarKind::TotalInertia, -1, "");
  const int p_r = a.add_var(VarKind::TotalPfrRamp, -1, "");
  const int p_d = a.add_var(VarKind::TotalPfrDroop, -1, "");

  std::vector<LinearTerm> balance, def_in{{p_in, 1.0}}, def_r{{p_r, 1.0}}, def_d{{p_d, 1.0}};
  for (int k = 0; k < n_res; ++k) {
    balance.push_back({energy[k], -1.0});
    def_in.push_back({inertia[k], -1.0});
    def_r.push_back({ramp[k], -1.0});
    def_d.push_back({droop[k], -1.0});
  }
  // Written as -sum(P^E) = -P^D so the multiplier is the system lambda.
  a.eq(std::move(balance), -p.demand, RowKind::PowerBalance);
  a.eq(std::move(def_in), 0.0, RowKind::TotalInertiaDef);
  a.eq(std::move(def_r), 0.0, RowKind::TotalPfrRampDef);
  a.eq(std::move(def_d), 0.0, RowKind::TotalPfrDroopDef);

  for (int k = 0; k < n_res; ++k) {
    a.le({{energy[k], 1.0}, {dpl, -1.0}}, 0.0, RowKind::Contingency, k);
  }
  a.le({{dpl, -1.0}}, 0.0, RowKind::ContingencyNonNeg);
  a.le({{dpl, 1.0}, {p_in, -1.0}}, 0.0, RowKind::Rocof);
  a.le({{dpl, 1.0}, {p_d, -1.0}}, 0.0, RowKind::Qss);

  prob.cone = RotatedCone{
      AffineExpr{{{p_in, 1.0 / (2.0 * p.rocof_max)}}, 0.0},
      AffineExpr{{{p_r, 1.0 / p.t_pfr}}, 0.0},
      AffineExpr{{{dpl, 1.0 / (2.0 * std::sqrt(p.dfnad_max))}}, 0.0},
  };
  return prob;
}

void check_capacity(const Scenario& s) {
  double cap_max = 0.0, cap_min = 0.0;
  for (const auto& g : s.sgs) {
    cap_max += g.pmax;
    cap_min += g.pmin;
  }
  for (const auto& j : s.ibrs) {
    cap_max += j.pmax;
    cap_min += j.pmin;
  }
  if (cap_max < s.params.demand) {
    throw InfeasibleError("total capacity " + std::to_string(cap_max) + " MW is below demand " +
                          std::to_string(s.params.demand) + " MW");
  }
  if (cap_min > s.params.demand) {
    throw InfeasibleError("total minimum output " + std::to_string(cap_min) +
                          " MW exceeds demand " + std::to_string(s.params.demand) + " MW");
  }
}

bool mirrored_kind(VarKind kind) {
  return kind == VarKind::Energy || kind == VarKind::StateOfCharge;
}

}  // namespace

ConicProblem build(const Scenario& scenario, const BuildOptions& options) {
  validate(scenario);
  check_capacity(scenario);
  const ConicProblem up = build_up_form(scenario, options.bidirectional);
  return apply_direction(up, options.direction.value_or(scenario.params.direction));
}

ConicProblem apply_direction(const ConicProblem& up_form, Direction mode) {
  if (up_form.direction != Direction::Up) {
    throw PreconditionError("apply_direction expects a problem in Up form");
  }
  ConicProblem out = up_form;
  out.direction = mode;
  if (mode == Direction::Up) return out;

  std::vector<LinearRow> rows;
  rows.reserve(up_form.inequalities.size() * 2);
  for (const LinearRow& row : up_form.inequalities) {
    if (row.tag.leg != Leg::Up) {
      rows.push_back(row);
      continue;
    }
    LinearRow mirror = row;
    for (auto& t : mirror.terms) {
      if (mirrored_kind(up_form.variables[t.var].kind)) t.coeff = -t.coeff;
    }
    mirror.rhs = row.tag.mirror_rhs;
    mirror.tag.mirror_rhs = row.rhs;
    mirror.tag.leg = Leg::Down;
    if (mode == Direction::UpDown) rows.push_back(row);
    rows.push_back(std::move(mirror));
  }
  out.inequalities = std::move(rows);
  return out;
}

std::vector<int> orphan_variables(const ConicProblem& p) {
  std::vector<bool> used(p.num_vars(), false);
  for (std::size_t i = 0; i < p.num_vars(); ++i) used[i] = p.quad[i] != 0.0 || p.linear[i] != 0.0;
  for (const auto* rows : {&p.equalities, &p.inequalities}) {
    for (const auto& r : *rows) {
      for (const auto& t : r.terms) used[t.var] = used[t.var] || t.coeff != 0.0;
    }
  }
  if (p.cone) {
    for (const AffineExpr* e : {&p.cone->u, &p.cone->v, &p.cone->w}) {
      for (const auto& t : e->terms) used[t.var] = used[t.var] || t.coeff != 0.0;
    }
  }
  std::vector<int> orphans;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) orphans.push_back(static_cast<int>(i));
  }
  return orphans;
}

}  // namespace sced
