#include "sced/solver.hpp"

#include <chrono>
#include <cmath>

#include "cone_qp.hpp"
#include "sced/error.hpp"

namespace sced {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double dot(const std::vector<LinearTerm>& terms, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : terms) v += t.coeff * x[t.var];
  return v;
}

double eval(const AffineExpr& e, const std::vector<double>& x) {
  return dot(e.terms, x) + e.constant;
}

// Cone rows as s = h - Gx with s = (u + v, u - v, 2w).
void add_cone_rows(const RotatedCone& c, MatrixXd& G, VectorXd& h, int row) {
  for (const auto& t : c.u.terms) {
    G(row, t.var) -= t.coeff;
    G(row + 1, t.var) -= t.coeff;
  }
  for (const auto& t : c.v.terms) {
    G(row, t.var) -= t.coeff;
    G(row + 1, t.var) += t.coeff;
  }
  for (const auto& t : c.w.terms) G(row + 2, t.var) -= 2.0 * t.coeff;
  h[row] = c.u.constant + c.v.constant;
  h[row + 1] = c.u.constant - c.v.constant;
  h[row + 2] = 2.0 * c.w.constant;
}

detail::ConeQpData to_cone_qp(const ConicProblem& pb) {
  const int n = pb.num_vars();
  const int p = pb.equalities.size();
  const int l = pb.inequalities.size();
  const int m = l + (pb.cone ? 3 : 0);
  detail::ConeQpData d;
  d.P = MatrixXd::Zero(n, n);
  d.q = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    d.P(i, i) = 2.0 * pb.quad[i];
    d.q[i] = pb.linear[i];
  }
  d.A = MatrixXd::Zero(p, n);
  d.b = VectorXd::Zero(p);
  for (int i = 0; i < p; ++i) {
    for (const auto& t : pb.equalities[i].terms) d.A(i, t.var) += t.coeff;
    d.b[i] = pb.equalities[i].rhs;
  }
  d.G = MatrixXd::Zero(m, n);
  d.h = VectorXd::Zero(m);
  for (int i = 0; i < l; ++i) {
    for (const auto& t : pb.inequalities[i].terms) d.G(i, t.var) += t.coeff;
    d.h[i] = pb.inequalities[i].rhs;
  }
  d.orthant_dim = l;
  if (pb.cone) {
    add_cone_rows(*pb.cone, d.G, d.h, l);
    d.soc_dims = {3};
  }
  return d;
}

int find_row(const std::vector<LinearRow>& rows, RowKind kind, int resource = -1) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].tag.kind == kind && rows[i].tag.resource == resource) return static_cast<int>(i);
  }
  return -1;
}

double at(const std::vector<double>& v, int i) { return i >= 0 ? v[i] : 0.0; }

DispatchSolution extract_primal(const ConicProblem& pb, const std::vector<double>& x) {
  DispatchSolution sol;
  sol.x = x;
  auto value = [&](VarKind kind, int r) {
    const auto i = pb.find(kind, r);
    return i ? x[*i] : 0.0;
  };
  for (int k = 0; k < static_cast<int>(pb.num_resources()); ++k) {
    ResourceDispatch rd;
    rd.id = pb.resource_ids[k];
    rd.is_ibr = pb.is_ibr(k);
    rd.energy = value(VarKind::Energy, k);
    rd.pfr_ramp = value(VarKind::PfrRamp, k);
    rd.pfr_droop = value(VarKind::PfrDroop, k);
    rd.inertia = value(VarKind::Inertia, k);
    rd.inertia_factor =
        rd.is_ibr ? value(VarKind::InertiaFactor, k) : rd.inertia / pb.params.rocof_max;
    rd.soc_end = value(VarKind::StateOfCharge, k);
    rd.loss = value(VarKind::Loss, k);
    sol.resources.push_back(rd);
  }
  sol.total_inertia = value(VarKind::TotalInertia, -1);
  sol.total_pfr_ramp = value(VarKind::TotalPfrRamp, -1);
  sol.total_pfr_droop = value(VarKind::TotalPfrDroop, -1);
  sol.largest_contingency = value(VarKind::LargestContingency, -1);
  sol.objective = objective_value(pb, x);
  return sol;
}

DualSolution extract_dual(const ConicProblem& pb, const std::vector<double>& y,
                          const std::vector<double>& z) {
  DualSolution du;
  du.resource_ids = pb.resource_ids;
  du.eq_multipliers = y;
  du.ineq_multipliers.assign(z.begin(), z.begin() + pb.inequalities.size());
  du.lambda_energy = at(y, find_row(pb.equalities, RowKind::PowerBalance));
  du.lambda_inertia = at(y, find_row(pb.equalities, RowKind::TotalInertiaDef));
  du.lambda_pfr_r = at(y, find_row(pb.equalities, RowKind::TotalPfrRampDef));
  du.lambda_pfr_d = at(y, find_row(pb.equalities, RowKind::TotalPfrDroopDef));
  du.mu = at(du.ineq_multipliers, find_row(pb.inequalities, RowKind::Rocof));
  du.delta = at(du.ineq_multipliers, find_row(pb.inequalities, RowKind::Qss));
  for (int k = 0; k < static_cast<int>(pb.num_resources()); ++k) {
    du.lambda_k.push_back(at(du.ineq_multipliers, find_row(pb.inequalities, RowKind::Contingency, k)));
  }
  if (pb.cone) {
    const std::size_t o = pb.inequalities.size();
    du.gamma3 = z[o];
    du.gamma1 = -z[o + 1];
    du.gamma2 = -z[o + 2];
  }
  return du;
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

double objective_value(const ConicProblem& pb, const std::vector<double>& x) {
  double f = pb.constant;
  for (std::size_t i = 0; i < pb.num_vars(); ++i) {
    f += pb.quad[i] * x[i] * x[i] + pb.linear[i] * x[i];
  }
  return f;
}

SolveResult solve(const ConicProblem& problem, double tol) {
  if (!(tol >= 1e-10 && tol <= 1e-4)) {
    throw PreconditionError("solve: tol must lie in [1e-10, 1e-4]");
  }
  const auto start = std::chrono::steady_clock::now();
  const detail::ConeQpData data = to_cone_qp(problem);
  detail::ConeQpSettings settings;
  settings.tol = tol;
  const detail::ConeQpResult r = detail::solve_cone_qp(data, settings);

  SolveResult out;
  SolveReport& rep = out.report;
  switch (r.status) {
    case detail::ConeQpStatus::Optimal: rep.status = SolveStatus::Optimal; break;
    case detail::ConeQpStatus::Infeasible: rep.status = SolveStatus::Infeasible; break;
    case detail::ConeQpStatus::Unbounded: rep.status = SolveStatus::Unbounded; break;
    case detail::ConeQpStatus::NumericalFailure: rep.status = SolveStatus::NumericalFailure; break;
  }
  rep.iterations = r.iterations;
  rep.primal_objective = r.pcost + problem.constant;
  rep.dual_objective = r.dcost + problem.constant;
  rep.relative_gap = std::abs(r.gap) / std::max(1.0, std::abs(r.pcost));
  if (rep.status == SolveStatus::Infeasible) {
    std::vector<double> cert = to_std(r.cert_y);
    const auto cz = to_std(r.cert_z);
    cert.insert(cert.end(), cz.begin(), cz.end());
    rep.certificate = std::move(cert);
  }

  if (r.x.allFinite() && r.y.allFinite() && r.z.allFinite()) {
    out.primal = extract_primal(problem, to_std(r.x));
    out.dual = extract_dual(problem, to_std(r.y), to_std(r.z));
    const KktResiduals res = kkt_residuals(problem, out.primal, out.dual);
    out.dual.stationarity_residual = res.dual;
    out.dual.complementarity_residual = res.complementarity;
  }
  rep.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

KktResiduals kkt_residuals(const ConicProblem& pb, const DispatchSolution& primal,
                           const DualSolution& dual) {
  const std::vector<double>& x = primal.x;
  if (x.size() != pb.num_vars() || dual.eq_multipliers.size() != pb.equalities.size() ||
      dual.ineq_multipliers.size() != pb.inequalities.size()) {
    throw PreconditionError("kkt_residuals: solution dimensions do not match the problem");
  }
  KktResiduals out;
  std::vector<double> grad(pb.num_vars());
  for (std::size_t i = 0; i < pb.num_vars(); ++i) grad[i] = 2.0 * pb.quad[i] * x[i] + pb.linear[i];

  for (std::size_t i = 0; i < pb.equalities.size(); ++i) {
    const LinearRow& row = pb.equalities[i];
    out.primal = std::max(out.primal, std::abs(dot(row.terms, x) - row.rhs));
    for (const auto& t : row.terms) grad[t.var] += dual.eq_multipliers[i] * t.coeff;
  }
  for (std::size_t i = 0; i < pb.inequalities.size(); ++i) {
    const LinearRow& row = pb.inequalities[i];
    const double slack = row.rhs - dot(row.terms, x);
    const double z = dual.ineq_multipliers[i];
    out.primal = std::max(out.primal, -slack);
    out.dual = std::max(out.dual, -z);
    out.complementarity = std::max(out.complementarity, std::abs(slack * z));
    for (const auto& t : row.terms) grad[t.var] += z * t.coeff;
  }
  if (pb.cone) {
    const RotatedCone& c = *pb.cone;
    const double u = eval(c.u, x), v = eval(c.v, x), w = eval(c.w, x);
    const double s0 = u + v, s1 = u - v, s2 = 2.0 * w;
    out.primal = std::max(out.primal, std::hypot(s1, s2) - s0);
    const double z0 = dual.gamma3, z1 = -dual.gamma1, z2 = -dual.gamma2;
    out.dual = std::max(out.dual, std::hypot(z1, z2) - z0);
    out.complementarity = std::max(out.complementarity, std::abs(s0 * z0 + s1 * z1 + s2 * z2));
    for (const auto& t : c.u.terms) grad[t.var] -= (z0 + z1) * t.coeff;
    for (const auto& t : c.v.terms) grad[t.var] -= (z0 - z1) * t.coeff;
    for (const auto& t : c.w.terms) grad[t.var] -= 2.0 * z2 * t.coeff;
  }
  for (double g : grad) out.dual = std::max(out.dual, std::abs(g));

  double sum_k = 0.0;
  for (double l : dual.lambda_k) sum_k += l;
  out.contingency_stationarity = std::abs(sum_k - dual.mu - dual.delta -
                                          dual.gamma2 / std::sqrt(pb.params.dfnad_max));
  return out;
}

}  // namespace sced
