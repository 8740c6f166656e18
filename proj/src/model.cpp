#include "sced/model.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "sced/error.hpp"
#include "sced/units.hpp"

namespace sced {

using nlohmann::json;

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up:
      return "Up";
    case Direction::Down:
      return "Down";
    case Direction::UpDown:
      return "UpDown";
  }
  return "Up";
}

Direction parse_direction(std::string_view text) {
  if (text == "Up" || text == "up") return Direction::Up;
  if (text == "Down" || text == "down") return Direction::Down;
  if (text == "UpDown" || text == "updown") return Direction::UpDown;
  throw ParseError("direction: expected Up, Down or UpDown, got '" + std::string(text) + "'");
}

std::vector<std::string> Scenario::resource_ids() const {
  std::vector<std::string> ids;
  ids.reserve(resource_count());
  for (const auto& g : sgs) ids.push_back(g.id);
  for (const auto& j : ibrs) ids.push_back(j.id);
  return ids;
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

bool finite(double x) { return std::isfinite(x); }

void validate_params(const SystemParams& p) {
  const std::array<std::pair<const char*, double>, 7> positive{{{"f0", p.f0},
                                                                {"rocof_max", p.rocof_max},
                                                                {"dfnad_max", p.dfnad_max},
                                                                {"dfqss_max", p.dfqss_max},
                                                                {"t_pfr", p.t_pfr},
                                                                {"dt", p.dt},
                                                                {"demand", p.demand}}};
  for (const auto& [name, value] : positive) {
    require(finite(value) && value > 0.0, std::string("params.") + name, "must be positive");
  }
  require(p.t_pfr <= p.dt, "params.t_pfr", "must not exceed dt");
  require(p.dfqss_max <= p.dfnad_max, "params.dfqss_max", "must not exceed dfnad_max");
}

void validate_sg(const SyncGenerator& g) {
  const std::string at = "sg " + g.id + ".";
  for (double v : {g.pmin, g.pmax, g.pgov_max, g.cost_a, g.cost_b, g.cost_c, g.h, g.s_mva,
                   g.droop_gain}) {
    require(finite(v), at + "value", "must be finite");
  }
  require(g.pmin <= g.pmax, at + "pmin", "pmin exceeds pmax");
  require(g.h >= 0.0, at + "h", "must be non-negative");
  require(g.s_mva > 0.0, at + "s_mva", "must be positive");
  require(g.cost_a >= 0.0, at + "cost_a", "must be non-negative (convex cost)");
  require(g.droop_gain >= 0.0, at + "droop_gain", "must be non-negative");
}

void validate_ibr(const InverterResource& j) {
  const std::string at = "ibr " + j.id + ".";
  for (double v : {j.pmin, j.pmax, j.emin, j.emax, j.e0, j.eta, j.d_max, j.alpha, j.beta,
                   j.droop_gain, j.cost_energy, j.cost_inertia, j.cost_pfr_r, j.cost_pfr_d}) {
    require(finite(v), at + "value", "must be finite");
  }
  require(j.pmin <= j.pmax, at + "pmin", "pmin exceeds pmax");
  require(j.emin <= j.emax, at + "emin", "emin exceeds emax");
  require(j.emin <= j.e0 && j.e0 <= j.emax, at + "e0", "initial SoC outside [emin, emax]");
  require(j.eta > 0.0 && j.eta <= 1.0, at + "eta", "must lie in (0, 1]");
  require(j.d_max >= 0.0, at + "d_max", "must be non-negative");
  require(j.alpha >= 0.0 && j.alpha <= 1.0, at + "alpha", "must lie in [0, 1]");
  require(j.beta >= 0.0 && j.beta <= 1.0, at + "beta", "must lie in [0, 1]");
  require(j.droop_gain >= 0.0, at + "droop_gain", "must be non-negative");
  require(j.cost_energy >= 0.0, at + "cost_energy", "must be non-negative");
}

}  // namespace

void validate(const Scenario& s) {
  validate_params(s.params);
  require(s.resource_count() > 0, "sgs", "scenario needs at least one resource");
  std::set<std::string> seen;
  for (const auto& id : s.resource_ids()) {
    require(!id.empty(), "id", "resource id must not be empty");
    require(seen.insert(id).second, "id", "duplicate resource id '" + id + "'");
  }
  for (const auto& g : s.sgs) validate_sg(g);
  for (const auto& j : s.ibrs) validate_ibr(j);
}

namespace {

// Reads the fields of one JSON object, rejecting keys nobody asked for.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string context) : obj_(obj), context_(std::move(context)) {
    if (!obj_.is_object()) throw ParseError(context_ + ": expected an object");
  }

  double number(const char* key, Dimension dim) {
    used_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) throw ValidationError(context_ + key, "required field missing");
    return parse_quantity(*it, dim, context_ + key);
  }

  double number_or(const char* key, Dimension dim, double fallback) {
    used_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return fallback;
    return parse_quantity(*it, dim, context_ + key);
  }

  std::string string(const char* key) {
    used_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) throw ValidationError(context_ + key, "required field missing");
    if (!it->is_string()) throw ParseError(context_ + key + ": expected a string");
    return it->get<std::string>();
  }

  bool has(const char* key) const { return obj_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!used_.count(key)) throw ValidationError(context_ + key, "unknown field");
    }
  }

 private:
  const json& obj_;
  std::string context_;
  std::set<std::string> used_;
};

SystemParams params_from_json(const json& doc) {
  FieldReader r(doc, "params.");
  SystemParams p;
  p.f0 = r.number("f0", Dimension::Frequency);
  p.rocof_max = r.number("rocof_max", Dimension::Rocof);
  p.dfnad_max = r.number("dfnad_max", Dimension::Frequency);
  p.dfqss_max = r.number("dfqss_max", Dimension::Frequency);
  p.t_pfr = r.number("t_pfr", Dimension::Time);
  p.dt = r.number("dt", Dimension::Time);
  p.demand = r.number("demand", Dimension::Power);
  if (r.has("direction")) p.direction = parse_direction(r.string("direction"));
  r.finish();
  return p;
}

SyncGenerator sg_from_json(const json& doc, std::size_t index) {
  FieldReader r(doc, "sgs[" + std::to_string(index) + "].");
  SyncGenerator g;
  g.id = r.string("id");
  g.pmin = r.number("pmin", Dimension::Power);
  g.pmax = r.number("pmax", Dimension::Power);
  g.pgov_max = r.number_or("pgov_max", Dimension::Power, g.pmax);
  g.cost_a = r.number("cost_a", Dimension::Plain);
  g.cost_b = r.number("cost_b", Dimension::Plain);
  g.cost_c = r.number_or("cost_c", Dimension::Plain, 0.0);
  g.h = r.number("h", Dimension::Time);
  g.s_mva = r.number("s_mva", Dimension::Plain);
  g.droop_gain = r.number("droop_gain", Dimension::Plain);
  r.finish();
  return g;
}

InverterResource ibr_from_json(const json& doc, std::size_t index) {
  FieldReader r(doc, "ibrs[" + std::to_string(index) + "].");
  InverterResource j;
  j.id = r.string("id");
  j.pmin = r.number("pmin", Dimension::Power);
  j.pmax = r.number("pmax", Dimension::Power);
  j.emin = r.number("emin", Dimension::Energy);
  j.emax = r.number("emax", Dimension::Energy);
  j.e0 = r.number("e0", Dimension::Energy);
  j.eta = r.number("eta", Dimension::Plain);
  j.d_max = r.number("d_max", Dimension::InertiaFactor);
  j.alpha = r.number_or("alpha", Dimension::Plain, 1.0);
  j.beta = r.number_or("beta", Dimension::Plain, 0.0);
  j.droop_gain = r.number("droop_gain", Dimension::Plain);
  j.cost_energy = r.number("cost_energy", Dimension::Plain);
  j.cost_inertia = r.number("cost_inertia", Dimension::Plain);
  j.cost_pfr_r = r.number("cost_pfr_r", Dimension::Plain);
  j.cost_pfr_d = r.number("cost_pfr_d", Dimension::Plain);
  r.finish();
  return j;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("scenario: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "params" && key != "sgs" && key != "ibrs" && key != "conservative_mode") {
      throw ValidationError(key, "unknown field");
    }
  }
  if (!doc.contains("params")) throw ValidationError("params", "required field missing");

  Scenario s;
  s.params = params_from_json(doc.at("params"));
  if (doc.contains("conservative_mode")) {
    if (!doc["conservative_mode"].is_boolean()) {
      throw ParseError("conservative_mode: expected true or false");
    }
    s.conservative_mode = doc["conservative_mode"].get<bool>();
  }
  if (doc.contains("sgs")) {
    const auto& arr = doc["sgs"];
    if (!arr.is_array()) throw ParseError("sgs: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) s.sgs.push_back(sg_from_json(arr[i], i));
  }
  if (doc.contains("ibrs")) {
    const auto& arr = doc["ibrs"];
    if (!arr.is_array()) throw ParseError("ibrs: expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) s.ibrs.push_back(ibr_from_json(arr[i], i));
  }
  if (s.conservative_mode) {
    for (auto& j : s.ibrs) {
      j.alpha = 1.0;
      j.beta = 0.0;
    }
  }
  validate(s);
  return s;
}

Scenario load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return scenario_from_json(doc);
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_scenario(buffer.str());
}

json to_json(const Scenario& s) {
  const auto& p = s.params;
  json doc;
  doc["params"] = {{"f0", p.f0},         {"rocof_max", p.rocof_max}, {"dfnad_max", p.dfnad_max},
                   {"dfqss_max", p.dfqss_max}, {"t_pfr", p.t_pfr},   {"dt", p.dt},
                   {"demand", p.demand}, {"direction", std::string(to_string(p.direction))}};
  doc["conservative_mode"] = s.conservative_mode;
  doc["sgs"] = json::array();
  for (const auto& g : s.sgs) {
    doc["sgs"].push_back({{"id", g.id},
                          {"pmin", g.pmin},
                          {"pmax", g.pmax},
                          {"pgov_max", g.pgov_max},
                          {"cost_a", g.cost_a},
                          {"cost_b", g.cost_b},
                          {"cost_c", g.cost_c},
                          {"h", g.h},
                          {"s_mva", g.s_mva},
                          {"droop_gain", g.droop_gain}});
  }
  doc["ibrs"] = json::array();
  for (const auto& j : s.ibrs) {
    doc["ibrs"].push_back({{"id", j.id},
                           {"pmin", j.pmin},
                           {"pmax", j.pmax},
                           {"emin", j.emin},
                           {"emax", j.emax},
                           {"e0", j.e0},
                           {"eta", j.eta},
                           {"d_max", j.d_max},
                           {"alpha", j.alpha},
                           {"beta", j.beta},
                           {"droop_gain", j.droop_gain},
                           {"cost_energy", j.cost_energy},
                           {"cost_inertia", j.cost_inertia},
                           {"cost_pfr_r", j.cost_pfr_r},
                           {"cost_pfr_d", j.cost_pfr_d}});
  }
  return doc;
}

std::string serialize_scenario(const Scenario& s) { return to_json(s).dump(2); }

std::string scenario_digest(const Scenario& s) {
  const std::string canonical = to_json(s).dump();
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return hex.str();
}

InertiaParams sg_inertia_params(double h, double s_mva, double f0, double rocof_max) {
  if (!(h >= 0.0) || !(s_mva > 0.0) || !(f0 > 0.0) || !(rocof_max > 0.0)) {
    throw PreconditionError("sg_inertia_params: h >= 0 and s_mva, f0, rocof_max > 0 required");
  }
  const double d = 2.0 * h * s_mva / f0;
  return {d, d * rocof_max};
}

PfrCapability pfr_capability(double droop_gain, double pmax, double f0, double dfnad,
                             double dfqss) {
  if (!(f0 > 0.0) || droop_gain < 0.0 || dfnad < 0.0 || dfqss < 0.0) {
    throw PreconditionError("pfr_capability: f0 > 0 and non-negative gain and limits required");
  }
  // Capability scales with rated power; a negative rating gives no response.
  const double base = droop_gain * std::max(pmax, 0.0) / f0;
  return {base * dfnad, base * dfqss};
}

}  // namespace sced
