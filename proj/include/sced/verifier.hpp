#pragma once

#include <optional>

#include "sced/model.hpp"
#include "sced/settlement.hpp"
#include "sced/solver.hpp"

namespace sced {

/// Aggregated post-contingency response of the whole system.
struct AggregateResponse {
  double d_total = 0.0;  // MW/(Hz/s)
  double pr = 0.0;       // MW reached at t_pfr
  double pd = 0.0;       // MW held after t_pfr
  double t_pfr = 0.0;    // s
  double loss = 0.0;     // MW
};

/// Sample-exact trajectory of D*df' = PFR(t) - loss, with the recovery
/// capped at df = 0. dfdot is the right limit at t = 0 and the mean of
/// both limits at interior kinks. Throws PreconditionError for d_total <= 0,
/// loss <= 0, step > t_pfr/20 or a non-positive horizon.
FrequencyTrace simulate_response(const AggregateResponse& r, double step, double horizon);

AggregateResponse aggregate(const DispatchSolution& dispatch, const SystemParams& params,
                            double loss);

/// horizon defaults to params.dt.
FrequencyTrace simulate_event(const DispatchSolution& dispatch, const SystemParams& params,
                              double loss, double step,
                              std::optional<double> horizon = std::nullopt);

struct NadirPoint {
  double t_star = 0.0;  // s
  double dev = 0.0;     // Hz, positive
};

/// Nadir inside the ramp phase. Throws PreconditionError when pr < loss or
/// d_total <= 0.
NadirPoint nadir_closed_form(double d_total, double pr, double t_pfr, double loss);

/// Slack allowed on every limit check.
inline constexpr double kSimTolerance = 1e-6;

struct SecurityReport {
  double loss = 0.0;
  double max_abs_rocof = 0.0;    // Hz/s
  double nadir_deviation = 0.0;  // Hz, over the simulated horizon
  double nadir_time = 0.0;       // s
  double qss_margin = 0.0;       // MW, pd - loss
  bool arrested = false;         // ramp reaches the loss
  bool pass_rocof = false;
  bool pass_nadir = false;
  bool pass_qss = false;
  FrequencyTrace trace;

  bool all_pass() const { return pass_rocof && pass_nadir && pass_qss; }
};

/// loss defaults to the dispatch's largest contingency, step to t_pfr/1000.
SecurityReport security_check(const DispatchSolution& dispatch, const SystemParams& params,
                              std::optional<double> loss = std::nullopt,
                              std::optional<double> step = std::nullopt,
                              std::optional<double> horizon = std::nullopt);

}  // namespace sced
