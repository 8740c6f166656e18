#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "case_study.hpp"
#include "fixtures.hpp"
#include "sced/error.hpp"
#include "sced/oracle.hpp"
#include "sced/pricing.hpp"
#include "sced/settlement.hpp"
#include "sced/solver.hpp"
#include "sced/verifier.hpp"

using namespace sced;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Worst stationarity gap of the largest-contingency variable over all solves.
double worst_stationarity = 0.0;
int stationarity_solves = 0;

void record_stationarity(const SolveResult& r, const SystemParams& p) {
  double sum = 0.0;
  for (double l : r.dual.lambda_k) sum += l;
  const double gap =
      std::abs(sum - r.dual.mu - r.dual.delta - r.dual.gamma2 / std::sqrt(p.dfnad_max));
  worst_stationarity = std::max(worst_stationarity, gap);
  ++stationarity_solves;
}

SolveResult solve_case(const Scenario& s, const BuildOptions& o = {}) {
  SolveResult r = solve(build(s, o));
  if (r.report.status == SolveStatus::Optimal) record_stationarity(r, s.params);
  return r;
}

DualSolution duals_of(const case_study::Row& r) {
  DualSolution d;
  d.mu = r.mu;
  d.gamma1 = r.gamma1;
  d.gamma2 = r.gamma2;
  d.gamma3 = r.gamma3;
  d.delta = r.delta;
  return d;
}

void cone_identity() {
  double worst = 0.0;
  for (const auto& r : case_study::kRows) {
    worst = std::max(worst, std::abs(std::hypot(r.gamma1, r.gamma2) - r.gamma3));
  }
  report(1, worst <= 5e-4, "dual cone identity on the printed multipliers",
         fmt("worst |hypot(g1,g2) - g3| = %.2e", worst));
}

void price_formulas() {
  // inertia: (g3 - g1) / (2 x) = price, fitted on the two low inertia rows
  double num = 0.0, den = 0.0;
  for (int i : {2, 3}) {
    const auto& r = case_study::kRows[i];
    num += 0.5 * (r.gamma3 - r.gamma1) * r.inertia_price;
    den += r.inertia_price * r.inertia_price;
  }
  const double rocof_fit = num / den;
  const double rocof = std::round(rocof_fit * 10.0) / 10.0;

  // ramp: (g1 + g3) / T = price, one T for all rows
  num = den = 0.0;
  for (const auto& r : case_study::kRows) {
    num += (r.gamma1 + r.gamma3) * r.ramp_price;
    den += r.ramp_price * r.ramp_price;
  }
  const double t_fit = num / den;

  SystemParams p = fixtures::params(185.0);
  p.rocof_max = rocof;
  p.t_pfr = t_fit;
  double worst_in = 0.0, worst_r = 0.0, worst_d = 0.0;
  for (const auto& r : case_study::kRows) {
    const PriceSet ps = prices(duals_of(r), p);
    worst_in = std::max(worst_in, std::abs(ps.inertia - r.inertia_price));
    worst_r = std::max(worst_r, std::abs(ps.pfr_ramp - r.ramp_price));
    worst_d = std::max(worst_d, std::abs(ps.pfr_droop - r.droop_price));
  }
  const bool ok = rocof == 1.0 && worst_in <= 0.005 && t_fit >= 5.5 && t_fit <= 6.5 &&
                  worst_r <= 0.01 && worst_d <= 0.005;
  report(2, ok, "price formulas on the printed multipliers",
         fmt("rocof fit %.4f -> %.1f, inertia err %.4f, T fit %.3f", rocof_fit, rocof, worst_in,
             t_fit) +
             fmt(", ramp err %.4f, droop err %.4f", worst_r, worst_d));
}

struct Solved {
  Scenario scenario;
  DispatchSolution dispatch;
};

std::vector<Solved> oracle_comparison() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(7);
  std::vector<Solved> solved;
  int compared = 0, bad = 0, tried = 0;
  double worst_rel = 0.0, worst_kkt = 0.0, worst_gap = 0.0;
  for (int i = 0; i < 200 && compared < 24; ++i) {
    const fixtures::RandomCase c = fixtures::random_case(rng, i);
    ++tried;
    ConicProblem p;
    try {
      p = build(c.scenario, c.options);
    } catch (const InfeasibleError&) {
      continue;
    }
    const SolveResult r = solve(p);
    if (r.report.status != SolveStatus::Optimal) continue;
    record_stationarity(r, c.scenario.params);
    const KktResiduals k = kkt_residuals(p, r.primal, r.dual);
    const double kkt = std::max({k.primal, k.dual, k.complementarity});
    double rel = 1.0;
    try {
      const OracleResult o = brute_force_oracle(c.scenario, 0.01, c.options);
      rel = std::abs(o.objective - r.primal.objective) / std::max(1.0, std::abs(r.primal.objective));
    } catch (const Error&) {
    }
    worst_rel = std::max(worst_rel, rel);
    worst_kkt = std::max(worst_kkt, kkt);
    worst_gap = std::max(worst_gap, r.report.relative_gap);
    if (rel > 1e-3 || kkt > 1e-6 || r.report.relative_gap > 1e-6) ++bad;
    ++compared;
    solved.push_back({c.scenario, r.primal});
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(3, compared >= 20 && bad == 0 && secs < 10.0, "solver against the grid oracle",
         fmt("%.0f optimal of %.0f drawn, worst rel diff %.2e, worst KKT %.2e", compared, tried,
             worst_rel, worst_kkt) +
             fmt(", worst gap %.2e, %.2f s", worst_gap, secs));
  return solved;
}

void orderings() {
  BuildOptions pos, bi;
  pos.bidirectional = false;
  bi.bidirectional = true;
  const Scenario high = fixtures::six_sg(5.0), low = fixtures::six_sg(1.0);
  const SolveResult hp = solve_case(high, pos), hb = solve_case(high, bi);
  const SolveResult lp = solve_case(low, pos), lb = solve_case(low, bi);
  const bool all_optimal = hp.report.status == SolveStatus::Optimal &&
                           hb.report.status == SolveStatus::Optimal &&
                           lp.report.status == SolveStatus::Optimal &&
                           lb.report.status == SolveStatus::Optimal;
  if (!all_optimal) {
    report(4, false, "cost and price orderings", "a case study solve was not optimal");
    return;
  }
  auto pin = [&](const SolveResult& r, const Scenario& s) { return prices(r.dual, s.params).inertia; };
  const double eps = 1e-6;
  const bool a = lp.primal.objective >= hp.primal.objective - eps &&
                 lb.primal.objective >= hb.primal.objective - eps &&
                 pin(lp, low) >= pin(hp, high) - eps && pin(lb, low) >= pin(hb, high) - eps;
  const bool b = hb.primal.objective >= hp.primal.objective - eps &&
                 lb.primal.objective >= lp.primal.objective - eps &&
                 pin(lb, low) > pin(lp, low) + 1e-3 &&
                 std::abs(hb.primal.objective - hp.primal.objective) <= 1e-5 &&
                 std::abs(pin(hb, high) - pin(hp, high)) <= 1e-5;
  report(4, a && b, "cost and price orderings",
         fmt("high %.4f/%.4f, low %.4f/%.4f", hp.primal.objective, hb.primal.objective,
             lp.primal.objective, lb.primal.objective) +
             fmt("; inertia price high %.4f/%.4f, low %.4f/%.4f", pin(hp, high), pin(hb, high),
                 pin(lp, low), pin(lb, low)));
}

void footroom_identity() {
  const Scenario s = fixtures::six_sg(1.0);
  const SolveResult r = solve_case(s);
  if (r.report.status != SolveStatus::Optimal) {
    report(5, false, "footroom binding identity", "solve not optimal");
    return;
  }
  const ResourceDispatch* b = nullptr;
  double max_pe = -1e300;
  for (const auto& res : r.primal.resources) {
    if (res.is_ibr) b = &res;
    max_pe = std::max(max_pe, res.energy);
  }
  const double eta = s.ibrs[0].eta;
  const double err = std::abs(b->inertia - eta * b->energy);
  const double lerr = std::abs(r.primal.largest_contingency - max_pe);
  report(5, err <= 1e-6 && lerr <= 1e-6 && s.ibrs[0].pmin == 0.0, "footroom binding identity",
         fmt("P^In %.4f, eta*P^E %.4f, largest contingency %.4f, max P^E %.4f", b->inertia,
             eta * b->energy, r.primal.largest_contingency, max_pe));
}

void verifier_consistency(const std::vector<Solved>& solved) {
  int checked = 0, bad = 0;
  double worst_rate = -1e300, worst_nadir = -1e300, worst_cf = 0.0;
  for (const auto& c : solved) {
    const SystemParams& p = c.scenario.params;
    const double loss = c.dispatch.largest_contingency;
    if (!(loss > 0.0) || !(c.dispatch.total_inertia > 0.0)) continue;
    const FrequencyTrace tr = simulate_event(c.dispatch, p, loss, p.t_pfr / 1000.0);
    const AggregateResponse a = aggregate(c.dispatch, p, loss);
    const double sim = -*std::min_element(tr.df.begin(), tr.df.end());
    const double rate = std::abs(tr.dfdot[0]) - p.rocof_max;
    const double nadir = sim - p.dfnad_max;
    double cf_err = 1.0;
    if (a.pr >= a.loss) cf_err = std::abs(nadir_closed_form(a.d_total, a.pr, a.t_pfr, a.loss).dev - sim);
    worst_rate = std::max(worst_rate, rate);
    worst_nadir = std::max(worst_nadir, nadir);
    worst_cf = std::max(worst_cf, cf_err);
    if (rate > 1e-9 || nadir > 1e-3 || cf_err > 1e-3) ++bad;
    ++checked;
  }
  report(6, checked >= 20 && bad == 0, "simulated events respect the security limits",
         fmt("%.0f dispatches, worst rocof excess %.2e, worst nadir excess %.2e, closed form err "
             "%.2e",
             checked, worst_rate, worst_nadir, worst_cf));
}

void settlement_conservation(const std::vector<Solved>& solved) {
  std::vector<std::pair<FrequencyTrace, double>> traces;
  for (const auto& c : solved) {
    const double loss = c.dispatch.largest_contingency;
    if (!(loss > 0.0) || !(c.dispatch.total_inertia > 0.0)) continue;
    const SystemParams& p = c.scenario.params;
    FrequencyTrace tr = simulate_event(c.dispatch, p, loss, p.t_pfr / 1000.0);
    if (tr.df.back() != 0.0) continue;
    traces.emplace_back(std::move(tr), c.dispatch.total_inertia / p.rocof_max);
  }
  {
    FrequencyTrace v;
    v.step = 0.01;
    for (int i = 0; i <= 600; ++i) {
      const double t = 0.01 * i;
      v.df.push_back(-0.3 * std::sin(M_PI * t / 6.0));
      v.dfdot.push_back(-0.3 * M_PI / 6.0 * std::cos(M_PI * t / 6.0));
    }
    traces.emplace_back(std::move(v), 40.0);
  }
  const double rtp = 50.0;
  int bad = 0;
  double worst_lossless = 0.0, worst_lossy = 0.0;
  for (const auto& [tr, d] : traces) {
    const DeploymentPayment one = deployment_payments(tr, d, rtp);
    const double e1 = std::abs(one.net()) - one.tolerance;
    DeploymentOptions o;
    o.eta = 0.9;
    o.eta_adjusted = true;
    const DeploymentPayment lossy = deployment_payments(tr, d, rtp, o);
    const double charge = rtp * (1.0 / 0.9 - 1.0) * one.e_neg / 3600.0;
    const double e2 = std::abs(lossy.net() + charge) - lossy.tolerance;
    worst_lossless = std::max(worst_lossless, e1);
    worst_lossy = std::max(worst_lossy, e2);
    if (e1 > 1e-9 || e2 > 1e-9 || !(lossy.net() < 0.0)) ++bad;
  }
  report(7, traces.size() >= 2 && bad == 0, "inertial deployment payments conserve energy",
         fmt("%.0f recovered traces, worst excess over tolerance %.2e (eta 1), %.2e (eta 0.9)",
             static_cast<double>(traces.size()), worst_lossless, worst_lossy));
}

void stationarity() {
  for (const Scenario& s : {fixtures::three_resource(), fixtures::twins(),
                            fixtures::single_sg_pair(), fixtures::mirror_pair()}) {
    solve_case(s);
  }
  report(8, stationarity_solves > 0 && worst_stationarity <= 1e-6,
         "largest contingency stationarity",
         fmt("%.0f optimal solves, worst residual %.2e", stationarity_solves,
             worst_stationarity));
}

}  // namespace

int main() {
  cone_identity();
  price_formulas();
  const std::vector<Solved> solved = oracle_comparison();
  orderings();
  footroom_identity();
  verifier_consistency(solved);
  settlement_conservation(solved);
  stationarity();
  return failures == 0 ? 0 : 1;
}
