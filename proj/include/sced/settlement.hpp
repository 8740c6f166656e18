#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sced/model.hpp"
#include "sced/pricing.hpp"
#include "sced/solver.hpp"

namespace sced {

/// Uniformly sampled frequency deviation and its derivative.
struct FrequencyTrace {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<double> df;     // Hz
  std::vector<double> dfdot;  // Hz/s
  std::vector<std::string> comments;  // free text carried through files

  std::size_t size() const { return df.size(); }
  double time(std::size_t i) const { return t0 + step * static_cast<double>(i); }
  double end_time() const { return size() == 0 ? t0 : time(size() - 1); }
};

/// Largest gap between df and the running trapezoidal integral of dfdot.
double trace_drift(const FrequencyTrace& trace);

/// Allowed drift: one step of the steepest slope plus a relative floor.
double trace_tolerance(const FrequencyTrace& trace);

/// Throws ValidationError for a non-positive step, mismatched columns, fewer
/// than two samples or a derivative column that does not integrate to df.
void validate_trace(const FrequencyTrace& trace);

/// Columnar text with header `t,df,dfdot`; lines starting with '#' are kept
/// as comments. Throws ParseError on malformed input.
FrequencyTrace read_trace(std::istream& in);
FrequencyTrace read_trace_file(const std::filesystem::path& path);
void write_trace(std::ostream& out, const FrequencyTrace& trace);

struct CapacityPayment {
  std::string id;
  double inertia = 0.0;
  double pfr_ramp = 0.0;
  double pfr_droop = 0.0;
};

/// Price times scheduled quantity per resource.
std::vector<CapacityPayment> capacity_payments(const PriceSet& prices,
                                               const DispatchSolution& dispatch);

struct InertiaSplit {
  double e_pos = 0.0;  // MW*s delivered while frequency falls
  double e_neg = 0.0;  // MW*s absorbed while frequency rises
  double tolerance = 0.0;  // MW*s, D * |trapz(dfdot) - (df_end - df_0)|
};

/// Positive and negative parts of -D * dfdot, integrated on the linear
/// interpolant of the samples (split exactly at sign changes).
InertiaSplit split_inertia_provision(const FrequencyTrace& trace, double d);

struct DeploymentOptions {
  double eta = 1.0;
  bool eta_adjusted = false;           // absorbed energy scaled by 1/eta
  std::optional<double> rtp_negative;  // separate price for the absorbing leg
};

struct DeploymentPayment {
  double pay_pos = 0.0;  // credit, $
  double pay_neg = 0.0;  // charge, $ (<= 0 for a positive price)
  double e_pos = 0.0;
  double e_neg = 0.0;    // after the eta adjustment
  double tolerance = 0.0;  // $, integration tolerance at the positive price

  double net() const { return pay_pos + pay_neg; }
};

/// Inertial energy settled at the real-time price (rtp in $/MWh).
DeploymentPayment deployment_payments(const FrequencyTrace& trace, double d, double rtp,
                                      const DeploymentOptions& options = {});

/// Energy of a ramp-then-hold PFR schedule between the event and t_end.
double pfr_deployed_energy(double pr, double pd, double t_pfr, double t_end);

struct ResourceStatement {
  std::string id;
  double capacity_inertia = 0.0;
  double capacity_pfr_ramp = 0.0;
  double capacity_pfr_droop = 0.0;
  double deployment_inertia_pos = 0.0;
  double deployment_inertia_neg = 0.0;
  double deployment_pfr = 0.0;

  double total() const;
};

struct SettlementStatement {
  std::vector<ResourceStatement> resources;
  double tolerance = 0.0;  // $, summed integration tolerance
};

struct SettleOptions {
  std::optional<double> rtp_negative;
  bool eta_adjust_ibrs = true;
};

/// Capacity and deployment settlement of one interval. Measured inertial
/// response is attributed by each resource's scheduled D_k.
SettlementStatement settle(const Scenario& scenario, const PriceSet& prices,
                           const DispatchSolution& dispatch, const FrequencyTrace& trace,
                           double rtp, const SettleOptions& options = {});

/// Rows of `resource,component,amount`.
void write_statement(std::ostream& out, const SettlementStatement& statement);

}  // namespace sced
