#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sced {

// Internal units: MW, MW*s, Hz, Hz/s, s. Costs are $ per dispatch interval
// (quadratic SG cost a*P^2 + b*P + c, linear $/MW for everything else).

/// Which frequency events the inertia/PFR reservation must cover.
enum class Direction { Up, Down, UpDown };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view text);

struct SystemParams {
  double f0 = 0.0;         // nominal frequency, Hz
  double rocof_max = 0.0;  // largest admissible |df/dt|, Hz/s
  double dfnad_max = 0.0;  // largest admissible deviation at the nadir, Hz
  double dfqss_max = 0.0;  // largest admissible quasi-steady-state deviation, Hz
  double t_pfr = 0.0;      // PFR full-activation time, s
  double dt = 0.0;         // dispatch interval, s
  double demand = 0.0;     // pre-contingency demand, MW
  Direction direction = Direction::Up;
};

struct SyncGenerator {
  std::string id;
  double pmin = 0.0;
  double pmax = 0.0;
  double pgov_max = 0.0;  // governor-controlled transient capacity
  double cost_a = 0.0;    // $/MW^2
  double cost_b = 0.0;    // $/MW
  double cost_c = 0.0;    // $
  double h = 0.0;         // inertia constant, s
  double s_mva = 0.0;
  double droop_gain = 0.0;
};

struct InverterResource {
  std::string id;
  double pmin = 0.0;  // negative when the unit can charge
  double pmax = 0.0;
  double emin = 0.0;  // MW*s
  double emax = 0.0;
  double e0 = 0.0;
  double eta = 1.0;    // round-trip efficiency
  double d_max = 0.0;  // MW/(Hz/s)
  double alpha = 1.0;
  double beta = 0.0;
  double droop_gain = 0.0;
  double cost_energy = 0.0;  // applied to |dispatch| plus storage loss
  double cost_inertia = 0.0;
  double cost_pfr_r = 0.0;
  double cost_pfr_d = 0.0;
};

struct Scenario {
  SystemParams params;
  std::vector<SyncGenerator> sgs;
  std::vector<InverterResource> ibrs;
  // Forces alpha = 1, beta = 0 and uses the reduced headroom/footroom rows.
  bool conservative_mode = true;

  std::size_t resource_count() const { return sgs.size() + ibrs.size(); }
  /// Resource ids in solver order: synchronous generators first, then IBRs.
  std::vector<std::string> resource_ids() const;
};

/// Throws ValidationError naming the first violated invariant. Capacity
/// shortfall (sum of pmax below demand) is left to the builder, which reports
/// it as infeasibility.
void validate(const Scenario& scenario);

Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::filesystem::path& path);
Scenario scenario_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Scenario& scenario);
std::string serialize_scenario(const Scenario& scenario);

/// SHA-256 of the canonical serialization, hex encoded.
std::string scenario_digest(const Scenario& scenario);

struct InertiaParams {
  double d = 0.0;     // MW/(Hz/s)
  double p_in = 0.0;  // committed inertia service, MW
};

/// Swing-equation proportionality 2*H*S/f0 and the matching service quantity
/// at the RoCoF limit.
InertiaParams sg_inertia_params(double h, double s_mva, double f0, double rocof_max);

struct PfrCapability {
  double pr_max = 0.0;
  double pd_max = 0.0;
};

PfrCapability pfr_capability(double droop_gain, double pmax, double f0, double dfnad,
                             double dfqss);

}  // namespace sced
