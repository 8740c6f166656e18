#include "sced/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sced/error.hpp"

namespace sced {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Profile {
 public:
  explicit Profile(const AggregateResponse& r) : r_(r) {
    const double l = r.loss, t = r.t_pfr, d = r.d_total;
    df_t_ = (0.5 * r.pr * t - l * t) / d;
    if (r.pr >= 2.0 * l) {
      t_cap_ = 2.0 * l * t / r.pr;
    } else if (r.pd > l) {
      t_cap_ = t - d * df_t_ / (r.pd - l);
    }
  }

  double df(double t) const {
    if (t >= t_cap_) return 0.0;
    if (t <= r_.t_pfr) return (0.5 * r_.pr * t * t / r_.t_pfr - r_.loss * t) / r_.d_total;
    return df_t_ + (r_.pd - r_.loss) * (t - r_.t_pfr) / r_.d_total;
  }

  double rate(double t, bool from_left) const {
    if (from_left ? t > t_cap_ : t >= t_cap_) return 0.0;
    if (from_left ? t <= r_.t_pfr : t < r_.t_pfr) {
      return (r_.pr * t / r_.t_pfr - r_.loss) / r_.d_total;
    }
    return (r_.pd - r_.loss) / r_.d_total;
  }

  // Mean of the one-sided limits at kinks, the plain rate elsewhere.
  double sample_rate(double t) const {
    if (t <= 0.0) return rate(0.0, false);
    for (double b : {r_.t_pfr, t_cap_}) {
      if (std::isfinite(b) && std::abs(t - b) <= 1e-12 * std::max(1.0, b)) {
        return 0.5 * (rate(b, true) + rate(b, false));
      }
    }
    return rate(t, false);
  }

  double t_cap() const { return t_cap_; }

 private:
  AggregateResponse r_;
  double df_t_ = 0.0;
  double t_cap_ = kInf;
};

void check_response(const AggregateResponse& r) {
  if (!(r.d_total > 0.0)) {
    throw PreconditionError("simulate: total inertia factor must be positive");
  }
  if (!(r.loss > 0.0)) throw PreconditionError("simulate: loss must be positive");
  if (!(r.t_pfr > 0.0)) throw PreconditionError("simulate: t_pfr must be positive");
  if (r.pr < 0.0 || r.pd < 0.0) throw PreconditionError("simulate: negative PFR schedule");
}

}  // namespace

FrequencyTrace simulate_response(const AggregateResponse& r, double step, double horizon) {
  check_response(r);
  if (!(step > 0.0) || step > r.t_pfr / 20.0 * (1.0 + 1e-12)) {
    throw PreconditionError("simulate: step must lie in (0, t_pfr/20]");
  }
  if (!(horizon > 0.0)) throw PreconditionError("simulate: horizon must be positive");
  const Profile prof(r);
  const auto n = static_cast<std::size_t>(std::floor(horizon / step + 1e-9)) + 1;
  FrequencyTrace tr;
  tr.step = step;
  tr.df.reserve(n);
  tr.dfdot.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = step * static_cast<double>(i);
    tr.df.push_back(prof.df(t));
    tr.dfdot.push_back(prof.sample_rate(t));
  }
  std::ostringstream c;
  c.precision(12);
  c << "event loss=" << r.loss << " d_total=" << r.d_total << " pr=" << r.pr << " pd=" << r.pd
    << " t_pfr=" << r.t_pfr;
  tr.comments.push_back(c.str());
  tr.comments.push_back("recovery after t_pfr holds the droop schedule, capped at df=0");
  return tr;
}

AggregateResponse aggregate(const DispatchSolution& dispatch, const SystemParams& params,
                            double loss) {
  AggregateResponse r;
  double p_in = 0.0;
  for (const auto& res : dispatch.resources) {
    p_in += res.inertia;
    r.pr += res.pfr_ramp;
    r.pd += res.pfr_droop;
  }
  r.d_total = p_in / params.rocof_max;
  r.t_pfr = params.t_pfr;
  r.loss = loss;
  return r;
}

FrequencyTrace simulate_event(const DispatchSolution& dispatch, const SystemParams& params,
                              double loss, double step, std::optional<double> horizon) {
  return simulate_response(aggregate(dispatch, params, loss), step, horizon.value_or(params.dt));
}

NadirPoint nadir_closed_form(double d_total, double pr, double t_pfr, double loss) {
  if (!(d_total > 0.0)) throw PreconditionError("nadir_closed_form: d_total must be positive");
  if (loss == 0.0) return {};
  if (loss < 0.0) throw PreconditionError("nadir_closed_form: loss must be non-negative");
  if (pr < loss) throw PreconditionError("nadir_closed_form: ramp never reaches the loss");
  return {loss * t_pfr / pr, loss * loss * t_pfr / (2.0 * d_total * pr)};
}

SecurityReport security_check(const DispatchSolution& dispatch, const SystemParams& params,
                              std::optional<double> loss, std::optional<double> step,
                              std::optional<double> horizon) {
  const AggregateResponse r =
      aggregate(dispatch, params, loss.value_or(dispatch.largest_contingency));
  const double h = step.value_or(params.t_pfr / 1000.0);
  const double end = horizon.value_or(params.dt);

  SecurityReport rep;
  rep.loss = r.loss;
  rep.trace = simulate_response(r, h, end);
  const Profile prof(r);

  rep.max_abs_rocof = r.loss / r.d_total;
  for (double v : rep.trace.dfdot) rep.max_abs_rocof = std::max(rep.max_abs_rocof, std::abs(v));

  // Deepest point over the horizon: the ramp-phase stationary point, the end
  // of the ramp or the end of the window.
  std::vector<double> candidates{end};
  if (r.t_pfr <= end) candidates.push_back(r.t_pfr);
  if (r.pr > 0.0 && r.loss * r.t_pfr / r.pr <= std::min(r.t_pfr, end)) {
    candidates.push_back(r.loss * r.t_pfr / r.pr);
  }
  rep.nadir_deviation = 0.0;
  for (double t : candidates) {
    if (-prof.df(t) > rep.nadir_deviation) {
      rep.nadir_deviation = -prof.df(t);
      rep.nadir_time = t;
    }
  }

  rep.arrested = r.pr >= r.loss * (1.0 - 1e-12);
  rep.qss_margin = r.pd - r.loss;
  rep.pass_rocof = rep.max_abs_rocof <= params.rocof_max + kSimTolerance;
  rep.pass_nadir = rep.arrested && rep.nadir_deviation <= params.dfnad_max + kSimTolerance;
  rep.pass_qss = rep.qss_margin >= -kSimTolerance;
  return rep;
}

}  // namespace sced
