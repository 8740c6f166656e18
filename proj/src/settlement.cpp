#include "sced/settlement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sced/error.hpp"
#include "sced/units.hpp"

namespace sced {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(std::string_view cell, std::size_t line) {
  cell = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ParseError("trace line " + std::to_string(line) + ": bad number '" + std::string(cell) +
                     "'");
  }
  return v;
}

double trapz(const std::vector<double>& v, double h) {
  double s = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) s += 0.5 * h * (v[i - 1] + v[i]);
  return s;
}

}  // namespace

double trace_drift(const FrequencyTrace& tr) {
  double integral = 0.0, drift = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    integral += 0.5 * tr.step * (tr.dfdot[i - 1] + tr.dfdot[i]);
    drift = std::max(drift, std::abs(tr.df[i] - tr.df[0] - integral));
  }
  return drift;
}

double trace_tolerance(const FrequencyTrace& tr) {
  double slope = 0.0, level = 0.0;
  for (double v : tr.dfdot) slope = std::max(slope, std::abs(v));
  for (double v : tr.df) level = std::max(level, std::abs(v));
  return 2.0 * tr.step * slope + 1e-9 * (1.0 + level);
}

void validate_trace(const FrequencyTrace& tr) {
  if (!(tr.step > 0.0) || !std::isfinite(tr.step)) {
    throw ValidationError("step", "must be positive");
  }
  if (tr.df.size() != tr.dfdot.size()) {
    throw ValidationError("dfdot", "column length differs from df");
  }
  if (tr.size() < 2) throw ValidationError("df", "needs at least two samples");
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (!std::isfinite(tr.df[i]) || !std::isfinite(tr.dfdot[i])) {
      throw ValidationError("df", "non-finite sample at index " + std::to_string(i));
    }
  }
  const double drift = trace_drift(tr), tol = trace_tolerance(tr);
  if (drift > tol) {
    std::ostringstream msg;
    msg << "derivative does not integrate to df (drift " << drift << " Hz, tolerance " << tol
        << " Hz)";
    throw ValidationError("dfdot", msg.str());
  }
}

FrequencyTrace read_trace(std::istream& in) {
  FrequencyTrace tr;
  std::vector<double> times;
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    const std::string_view s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      tr.comments.emplace_back(trim(s.substr(1)));
      continue;
    }
    if (!header) {
      std::string h;
      for (char c : s) {
        if (c != ' ') h += c;
      }
      if (h != "t,df,dfdot") throw ParseError("trace: expected header 't,df,dfdot'");
      header = true;
      continue;
    }
    const auto c1 = s.find(','), c2 = s.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos ||
        s.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError("trace line " + std::to_string(n) + ": expected three columns");
    }
    times.push_back(parse_cell(s.substr(0, c1), n));
    tr.df.push_back(parse_cell(s.substr(c1 + 1, c2 - c1 - 1), n));
    tr.dfdot.push_back(parse_cell(s.substr(c2 + 1), n));
  }
  if (!header) throw ParseError("trace: missing header");
  if (times.size() < 2) throw ParseError("trace: needs at least two samples");
  tr.t0 = times.front();
  tr.step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - tr.time(i)) > 1e-6 * tr.step + 1e-9 * std::abs(times[i])) {
      throw ParseError("trace: samples are not uniformly spaced near t=" +
                       std::to_string(times[i]));
    }
  }
  return tr;
}

FrequencyTrace read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  return read_trace(in);
}

void write_trace(std::ostream& out, const FrequencyTrace& tr) {
  for (const auto& c : tr.comments) out << "# " << c << '\n';
  out << "t,df,dfdot\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out << tr.time(i) << ',' << tr.df[i] << ',' << tr.dfdot[i] << '\n';
  }
  out.precision(old);
}

std::vector<CapacityPayment> capacity_payments(const PriceSet& prices,
                                               const DispatchSolution& dispatch) {
  if (prices.ids.size() != dispatch.resources.size()) {
    throw PreconditionError("capacity_payments: price and dispatch resource sets differ");
  }
  std::vector<CapacityPayment> out;
  for (std::size_t k = 0; k < dispatch.resources.size(); ++k) {
    const ResourceDispatch& r = dispatch.resources[k];
    if (prices.ids[k] != r.id) {
      throw PreconditionError("capacity_payments: resource '" + r.id + "' has no price entry");
    }
    out.push_back({r.id, prices.inertia * r.inertia, prices.pfr_ramp * r.pfr_ramp,
                   prices.pfr_droop * r.pfr_droop});
  }
  return out;
}

InertiaSplit split_inertia_provision(const FrequencyTrace& tr, double d) {
  if (!(d >= 0.0)) throw PreconditionError("split_inertia_provision: D must be non-negative");
  validate_trace(tr);
  InertiaSplit out;
  const double h = tr.step;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double a = -d * tr.dfdot[i - 1], b = -d * tr.dfdot[i];
    if (a >= 0.0 && b >= 0.0) {
      out.e_pos += 0.5 * h * (a + b);
    } else if (a <= 0.0 && b <= 0.0) {
      out.e_neg -= 0.5 * h * (a + b);
    } else {
      const double theta = a / (a - b);
      const double first = 0.5 * theta * h * a, second = 0.5 * (1.0 - theta) * h * b;
      if (a > 0.0) {
        out.e_pos += first;
        out.e_neg -= second;
      } else {
        out.e_neg -= first;
        out.e_pos += second;
      }
    }
  }
  out.tolerance = d * std::abs(trapz(tr.dfdot, h) - (tr.df.back() - tr.df.front()));
  return out;
}

DeploymentPayment deployment_payments(const FrequencyTrace& tr, double d, double rtp,
                                      const DeploymentOptions& opt) {
  if (!std::isfinite(rtp)) throw PreconditionError("deployment_payments: rtp must be finite");
  if (opt.rtp_negative && !std::isfinite(*opt.rtp_negative)) {
    throw PreconditionError("deployment_payments: negative-leg rtp must be finite");
  }
  if (!(opt.eta > 0.0 && opt.eta <= 1.0)) {
    throw PreconditionError("deployment_payments: eta must lie in (0, 1]");
  }
  const InertiaSplit split = split_inertia_provision(tr, d);
  DeploymentPayment p;
  p.e_pos = split.e_pos;
  p.e_neg = opt.eta_adjusted ? split.e_neg / opt.eta : split.e_neg;
  p.pay_pos = rtp * p.e_pos / kSecondsPerHour;
  p.pay_neg = -opt.rtp_negative.value_or(rtp) * p.e_neg / kSecondsPerHour;
  p.tolerance = std::abs(rtp) * split.tolerance / kSecondsPerHour;
  return p;
}

double pfr_deployed_energy(double pr, double pd, double t_pfr, double t_end) {
  if (t_end <= 0.0) return 0.0;
  if (t_end <= t_pfr) return 0.5 * pr * t_end * t_end / t_pfr;
  return 0.5 * pr * t_pfr + pd * (t_end - t_pfr);
}

double ResourceStatement::total() const {
  return capacity_inertia + capacity_pfr_ramp + capacity_pfr_droop + deployment_inertia_pos +
         deployment_inertia_neg + deployment_pfr;
}

SettlementStatement settle(const Scenario& scenario, const PriceSet& prices,
                           const DispatchSolution& dispatch, const FrequencyTrace& trace,
                           double rtp, const SettleOptions& options) {
  const auto capacity = capacity_payments(prices, dispatch);
  const SystemParams& p = scenario.params;
  SettlementStatement st;
  for (std::size_t k = 0; k < dispatch.resources.size(); ++k) {
    const ResourceDispatch& r = dispatch.resources[k];
    DeploymentOptions dep;
    dep.rtp_negative = options.rtp_negative;
    if (r.is_ibr) {
      const auto it = std::find_if(scenario.ibrs.begin(), scenario.ibrs.end(),
                                   [&](const InverterResource& j) { return j.id == r.id; });
      if (it == scenario.ibrs.end()) {
        throw PreconditionError("settle: resource '" + r.id + "' is not in the scenario");
      }
      dep.eta = it->eta;
      dep.eta_adjusted = options.eta_adjust_ibrs;
    }
    const DeploymentPayment pay = deployment_payments(trace, r.inertia / p.rocof_max, rtp, dep);
    ResourceStatement rs;
    rs.id = r.id;
    rs.capacity_inertia = capacity[k].inertia;
    rs.capacity_pfr_ramp = capacity[k].pfr_ramp;
    rs.capacity_pfr_droop = capacity[k].pfr_droop;
    rs.deployment_inertia_pos = pay.pay_pos;
    rs.deployment_inertia_neg = pay.pay_neg;
    rs.deployment_pfr = rtp *
                        pfr_deployed_energy(r.pfr_ramp, r.pfr_droop, p.t_pfr,
                                            trace.end_time() - trace.t0) /
                        kSecondsPerHour;
    st.tolerance += pay.tolerance;
    st.resources.push_back(rs);
  }
  return st;
}

void write_statement(std::ostream& out, const SettlementStatement& st) {
  out << "resource,component,amount\n";
  const auto old = out.precision(12);
  for (const auto& r : st.resources) {
    out << r.id << ",capacity_inertia," << r.capacity_inertia << '\n'
        << r.id << ",capacity_pfr_ramp," << r.capacity_pfr_ramp << '\n'
        << r.id << ",capacity_pfr_droop," << r.capacity_pfr_droop << '\n'
        << r.id << ",deployment_inertia_pos," << r.deployment_inertia_pos << '\n'
        << r.id << ",deployment_inertia_neg," << r.deployment_inertia_neg << '\n'
        << r.id << ",deployment_pfr," << r.deployment_pfr << '\n'
        << r.id << ",total," << r.total() << '\n';
  }
  out.precision(old);
}

}  // namespace sced
