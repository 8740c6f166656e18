#include "sced/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "sced/error.hpp"
#include "sced/solver.hpp"

namespace sced {
namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kPenalty = 1e4;

double row_value(const LinearRow& row, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& t : row.terms) v += t.coeff * x[t.var];
  return v;
}

double affine(const AffineExpr& e, const std::vector<double>& x) {
  double v = e.constant;
  for (const auto& t : e.terms) v += t.coeff * x[t.var];
  return v;
}

// Minimizer of a unimodal function on [a, b].
template <class F>
double golden_section(F&& f, double a, double b) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-9 * (1.0 + std::abs(b))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
  }
  double best = f1 <= f2 ? x1 : x2;
  for (double end : {a, b}) {
    if (f(end) < f(best)) best = end;
  }
  return best;
}

struct Dim {
  double lb;
  double ub;
};

class Completion {
 public:
  Completion(const Scenario& s, const ConicProblem& pb) : s_(s), pb_(pb), x_(pb.num_vars(), 0.0) {
    up_ = pb.direction != Direction::Down;
    down_ = pb.direction != Direction::Up;
  }

  // Fills every variable from the energy dispatch and the IBR inertia service
  // and returns the largest constraint violation (infinite when undefined).
  double complete(const std::vector<double>& pe, double ibr_inertia) {
    const SystemParams& p = s_.params;
    std::fill(x_.begin(), x_.end(), 0.0);
    const int nsg = static_cast<int>(s_.sgs.size());
    double dpl = 0.0;
    for (double v : pe) dpl = std::max(dpl, v);

    double sum_in = 0.0, sum_r = 0.0, sum_d = 0.0;
    for (int k = 0; k < nsg; ++k) {
      const SyncGenerator& g = s_.sgs[k];
      const auto cap = pfr_capability(g.droop_gain, g.pmax, p.f0, p.dfnad_max, p.dfqss_max);
      double pr = cap.pr_max, pd = cap.pd_max;
      if (up_) {
        pr = std::min(pr, g.pgov_max - pe[k]);
        pd = std::min(pd, g.pmax - pe[k]);
      }
      if (down_) {
        pr = std::min(pr, pe[k] - g.pmin);
        pd = std::min(pd, pe[k] - g.pmin);
      }
      pr = std::max(pr, 0.0);
      pd = std::clamp(pd, 0.0, pr);
      const double pin = sg_inertia_params(g.h, g.s_mva, p.f0, p.rocof_max).p_in;
      set(VarKind::Energy, k, pe[k]);
      set(VarKind::PfrRamp, k, pr);
      set(VarKind::PfrDroop, k, pd);
      set(VarKind::Inertia, k, pin);
      sum_in += pin;
      sum_r += pr;
      sum_d += pd;
    }

    for (int jj = 0; jj < static_cast<int>(s_.ibrs.size()); ++jj) {
      const InverterResource& j = s_.ibrs[jj];
      const int k = nsg + jj;
      const double e = pe[k];
      const double pin = ibr_inertia;
      const double total_in = sum_in + pin;
      double need = 0.0;
      if (dpl > 0.0) {
        if (total_in <= 0.0) return std::numeric_limits<double>::infinity();
        need = dpl * dpl * p.rocof_max * p.t_pfr / (2.0 * p.dfnad_max * total_in) - sum_r;
      }
      const double pd = std::max(0.0, dpl - sum_d);
      double pr = std::max({pd, need, 0.0});
      if (!s_.conservative_mode && pb_.bidirectional && j.beta > 0.0) {
        if (up_) pr = std::max(pr, (pin / j.eta - e + j.pmin) / j.beta);
        if (down_) pr = std::max(pr, (pin / j.eta + e - j.pmax) / j.beta);
      }
      const double d = pin / p.rocof_max;
      const double e_in = d * p.dfnad_max;
      const double e_pfr = 0.5 * p.t_pfr * pr + (p.dt - p.t_pfr) * pd;
      const double root = std::sqrt(j.eta);
      double loss = std::max((1.0 / root - 1.0) * e, (root - 1.0) * e);
      double cap = j.emax;
      if (down_) cap = std::min(cap, j.emax - (e_pfr + e_in) / root);
      double soc = j.e0 - (e + loss) * p.dt;
      if (soc > cap) {
        loss = (j.e0 - cap) / p.dt - e;
        soc = j.e0 - (e + loss) * p.dt;
      }
      set(VarKind::Energy, k, e);
      set(VarKind::PfrRamp, k, pr);
      set(VarKind::PfrDroop, k, pd);
      set(VarKind::Inertia, k, pin);
      set(VarKind::InertiaFactor, k, d);
      set(VarKind::StateOfCharge, k, soc);
      set(VarKind::Loss, k, loss);
      set(VarKind::Throughput, k, std::abs(e));
      set(VarKind::PfrEnergy, k, e_pfr);
      set(VarKind::InertiaEnergy, k, e_in);
      sum_in += pin;
      sum_r += pr;
      sum_d += pd;
    }
    set(VarKind::LargestContingency, -1, dpl);
    set(VarKind::TotalInertia, -1, sum_in);
    set(VarKind::TotalPfrRamp, -1, sum_r);
    set(VarKind::TotalPfrDroop, -1, sum_d);
    return max_violation(pb_, x_);
  }

  const std::vector<double>& x() const { return x_; }

 private:
  void set(VarKind kind, int r, double v) { x_[pb_.index_of(kind, r)] = v; }

  const Scenario& s_;
  const ConicProblem& pb_;
  std::vector<double> x_;
  bool up_ = true;
  bool down_ = false;
};

}  // namespace

double max_violation(const ConicProblem& pb, const std::vector<double>& x) {
  double v = 0.0;
  for (const auto& row : pb.equalities) v = std::max(v, std::abs(row_value(row, x) - row.rhs));
  for (const auto& row : pb.inequalities) v = std::max(v, row_value(row, x) - row.rhs);
  if (pb.cone) {
    const double u = affine(pb.cone->u, x), w = affine(pb.cone->w, x);
    const double vv = affine(pb.cone->v, x);
    v = std::max(v, std::hypot(u - vv, 2.0 * w) - (u + vv));
  }
  return v;
}

OracleResult brute_force_oracle(const Scenario& scenario, double grid_step,
                                const BuildOptions& options) {
  if (!(grid_step > 0.0)) throw PreconditionError("brute_force_oracle: grid_step must be positive");
  if (scenario.resource_count() > 3 || scenario.ibrs.size() > 1) {
    throw PreconditionError("brute_force_oracle: instance too large");
  }
  const ConicProblem pb = build(scenario, options);
  const int n_res = static_cast<int>(scenario.resource_count());
  const int nsg = static_cast<int>(scenario.sgs.size());

  std::vector<Dim> dims;
  for (int k = 0; k + 1 < n_res; ++k) {
    if (k < nsg) {
      dims.push_back({scenario.sgs[k].pmin, scenario.sgs[k].pmax});
    } else {
      dims.push_back({scenario.ibrs[k - nsg].pmin, scenario.ibrs[k - nsg].pmax});
    }
  }
  const bool has_ibr = !scenario.ibrs.empty();
  const double pin_max = has_ibr ? scenario.ibrs[0].d_max * scenario.params.rocof_max : 0.0;

  Completion comp(scenario, pb);
  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  double merit_best = std::numeric_limits<double>::infinity();
  std::vector<double> centre(dims.size());
  std::vector<double> point(dims.size());
  std::vector<double> pe(n_res);

  // Search is steered by objective + penalty * violation; only strictly
  // feasible points may become the reported bound.
  auto evaluate = [&]() {
    double rest = scenario.params.demand;
    for (int k = 0; k + 1 < n_res; ++k) {
      pe[k] = point[k];
      rest -= point[k];
    }
    pe[n_res - 1] = rest;
    ++best.evaluated;
    auto merit_at = [&](double pin) {
      const double viol = comp.complete(pe, pin);
      if (!std::isfinite(viol)) return std::numeric_limits<double>::infinity();
      return objective_value(pb, comp.x()) + kPenalty * std::max(0.0, viol);
    };
    double pin = 0.0;
    if (has_ibr) pin = golden_section(merit_at, 0.0, pin_max);
    const double viol = comp.complete(pe, pin);
    if (!std::isfinite(viol)) return;
    const double f = objective_value(pb, comp.x());
    const double merit = f + kPenalty * std::max(0.0, viol);
    if (merit < merit_best) {
      merit_best = merit;
      centre = point;
    }
    if (viol <= kFeasTol && f < best.objective) {
      best.objective = f;
      best.x = comp.x();
    }
  };

  // Visits lb + i*step for every i with the value inside the window.
  std::function<void(std::size_t, const std::vector<Dim>&, double)> sweep =
      [&](std::size_t d, const std::vector<Dim>& window, double step) {
        if (d == dims.size()) {
          evaluate();
          return;
        }
        const double lb = dims[d].lb;
        const long i0 = static_cast<long>(std::ceil((window[d].lb - lb) / step - 1e-9));
        const long i1 = static_cast<long>(std::floor((window[d].ub - lb) / step + 1e-9));
        for (long i = std::max(0L, i0); i <= i1; ++i) {
          point[d] = std::min(lb + i * step, dims[d].ub);
          sweep(d + 1, window, step);
        }
      };

  double span = 0.0;
  for (const auto& d : dims) span = std::max(span, d.ub - d.lb);
  double step = std::max(grid_step, span / 40.0);
  sweep(0, dims, step);

  // Re-centre each level until the incumbent stops moving; the optimum often
  // sits on a diagonal constraint that a single window cannot follow.
  auto descend = [&](double h) {
    for (int pass = 0; pass < 200; ++pass) {
      const double before = merit_best;
      std::vector<Dim> window(dims.size());
      for (std::size_t d = 0; d < dims.size(); ++d) {
        window[d] = {std::max(dims[d].lb, centre[d] - 4.0 * h),
                     std::min(dims[d].ub, centre[d] + 4.0 * h)};
      }
      sweep(0, window, h);
      if (!(merit_best < before)) break;
    }
  };
  if (std::isfinite(merit_best)) {
    descend(step);
    while (step > grid_step) {
      step = std::max(grid_step, step / 4.0);
      descend(step);
    }
  }
  if (best.x.empty()) throw InfeasibleError("brute_force_oracle: no feasible grid point");
  return best;
}

}  // namespace sced
