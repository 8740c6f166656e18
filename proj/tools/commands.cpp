#include "commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "sced/error.hpp"
#include "sced/model.hpp"
#include "sced/settlement.hpp"
#include "sced/verifier.hpp"

namespace sced::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

std::string exact(double v) { return num(v, 17); }

using Row = std::vector<std::string>;

// Aligned columns for people, comma separated for machines.
void print_table(std::ostream& out, Format fmt, const std::string& title, const Row& header,
                 const std::vector<Row>& rows) {
  if (fmt == Format::Csv) {
    out << "# " << title << '\n';
    for (std::size_t r = 0; r <= rows.size(); ++r) {
      const Row& row = r == 0 ? header : rows[r - 1];
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
      out << '\n';
    }
    return;
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  out << title << '\n';
  auto line = [&](const Row& row) {
    out << "  ";
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(width[c]) + 2) << row[c];
    }
    out << std::right << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
}

void write_csv(const fs::path& path, const Row& header, const std::vector<Row>& rows) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  print_table(f, Format::Csv, path.filename().string(), header, rows);
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << doc.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::vector<Row> dispatch_rows(const DispatchSolution& d, bool full) {
  std::vector<Row> rows;
  auto f = [full](double v) { return full ? exact(v) : num(v); };
  for (const auto& r : d.resources) {
    rows.push_back({r.id, r.is_ibr ? "ibr" : "sg", f(r.energy), f(r.pfr_ramp), f(r.pfr_droop),
                    f(r.inertia), f(r.inertia_factor), r.is_ibr ? f(r.soc_end) : "",
                    r.is_ibr ? f(r.loss) : ""});
  }
  return rows;
}

const Row kDispatchHeader{"resource",  "type",          "energy_mw",           "pfr_ramp_mw",
                          "pfr_droop_mw", "inertia_mw", "inertia_factor_mw_per_hz_s",
                          "soc_end_mws", "loss_mw"};

std::vector<Row> price_rows(const PriceSet& p, bool full) {
  auto f = [full](double v) { return full ? exact(v) : num(v); };
  std::vector<Row> rows{{"lambda_energy", "", f(p.system_lambda)}};
  for (std::size_t k = 0; k < p.ids.size(); ++k) rows.push_back({"energy", p.ids[k], f(p.energy[k])});
  rows.push_back({"inertia", "", f(p.inertia)});
  rows.push_back({"pfr_ramp", "", f(p.pfr_ramp)});
  rows.push_back({"pfr_droop", "", f(p.pfr_droop)});
  for (const auto& id : p.setter_ids) rows.push_back({"contingency_setter", id, ""});
  return rows;
}

std::vector<Row> dual_rows(const DualSolution& d, bool full) {
  auto f = [full](double v) { return full ? exact(v) : num(v); };
  std::vector<Row> rows{{"mu", "", f(d.mu)},         {"gamma1", "", f(d.gamma1)},
                        {"gamma2", "", f(d.gamma2)}, {"gamma3", "", f(d.gamma3)},
                        {"delta", "", f(d.delta)},   {"lambda_energy", "", f(d.lambda_energy)}};
  for (std::size_t k = 0; k < d.lambda_k.size(); ++k) {
    rows.push_back({"lambda_k", d.resource_ids[k], f(d.lambda_k[k])});
  }
  return rows;
}

json security_to_json(const SecurityReport& r) {
  return {{"loss_mw", r.loss},
          {"max_abs_rocof", r.max_abs_rocof},
          {"nadir_deviation_hz", r.nadir_deviation},
          {"nadir_time_s", r.nadir_time},
          {"qss_margin_mw", r.qss_margin},
          {"arrested", r.arrested},
          {"pass_rocof", r.pass_rocof},
          {"pass_nadir", r.pass_nadir},
          {"pass_qss", r.pass_qss}};
}

std::vector<Row> security_rows(const SecurityReport& r, const SystemParams& p) {
  auto flag = [](bool ok) { return std::string(ok ? "pass" : "FAIL"); };
  return {{"rocof", num(r.max_abs_rocof), num(p.rocof_max), flag(r.pass_rocof)},
          {"nadir", num(r.nadir_deviation), num(p.dfnad_max), flag(r.pass_nadir)},
          {"qss_margin", num(r.qss_margin), "0", flag(r.pass_qss)}};
}

struct RunArtifact {
  Scenario scenario;
  std::string digest;
  json doc;
};

// Loads run.json and checks the embedded scenario against its digest.
RunArtifact load_run(const fs::path& run_dir) {
  RunArtifact a;
  a.doc = read_json(run_dir / "run.json");
  if (!a.doc.contains("scenario") || !a.doc.contains("scenario_digest")) {
    throw ParseError("run.json: missing scenario or digest");
  }
  a.scenario = scenario_from_json(a.doc["scenario"]);
  a.digest = scenario_digest(a.scenario);
  if (a.digest != a.doc["scenario_digest"].get<std::string>()) {
    throw ValidationError("scenario_digest", "run.json scenario does not match its digest");
  }
  if (a.doc.value("status", "") != "optimal") {
    throw Error("run in " + run_dir.string() + " has no optimal dispatch");
  }
  return a;
}

const std::string kDigestKey = "scenario_digest=";

struct SweepPoint {
  double value = 0.0;
  std::string status;
  double objective = 0.0;
  double lambda_energy = 0.0;
  double inertia = 0.0;
  double pfr_ramp = 0.0;
  double pfr_droop = 0.0;
  double largest_contingency = 0.0;
};

void apply_parameter(Scenario& s, const std::string& name, double v) {
  if (name == "h") {
    for (auto& g : s.sgs) g.h = v;
  } else if (name == "demand") {
    s.params.demand = v;
  } else if (name == "rocof_max") {
    s.params.rocof_max = v;
  } else if (name == "dfnad_max") {
    s.params.dfnad_max = v;
  } else if (name == "eta") {
    for (auto& j : s.ibrs) j.eta = v;
  } else if (name == "d_max") {
    for (auto& j : s.ibrs) j.d_max = v;
  } else {
    throw ValidationError("parameter", "unknown sweep parameter '" + name +
                                           "' (h, demand, rocof_max, dfnad_max, eta, d_max)");
  }
}

std::string trend(const std::vector<double>& v) {
  bool up = true, down = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double tol = 1e-6 * std::max(1.0, std::abs(v[i - 1]));
    if (v[i] < v[i - 1] - tol) up = false;
    if (v[i] > v[i - 1] + tol) down = false;
  }
  if (up && down) return "constant";
  if (up) return "non-decreasing";
  if (down) return "non-increasing";
  return "mixed";
}

}  // namespace

BuildOptions build_options(const std::string& mode) {
  BuildOptions o;
  if (mode == "positive-only") {
    o.bidirectional = false;
  } else if (mode == "bidirectional") {
    o.bidirectional = true;
  } else if (mode == "up" || mode == "down" || mode == "updown") {
    o.direction = parse_direction(mode);
  } else {
    throw ValidationError("mode", "unknown mode '" + mode + "'");
  }
  return o;
}

fs::path output_dir(const std::optional<fs::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SCED_OUT_DIR"); env && *env) return env;
  return "sced_out";
}

json dispatch_to_json(const DispatchSolution& d) {
  json res = json::array();
  for (const auto& r : d.resources) {
    res.push_back({{"id", r.id},
                   {"is_ibr", r.is_ibr},
                   {"energy", r.energy},
                   {"pfr_ramp", r.pfr_ramp},
                   {"pfr_droop", r.pfr_droop},
                   {"inertia", r.inertia},
                   {"inertia_factor", r.inertia_factor},
                   {"soc_end", r.soc_end},
                   {"loss", r.loss}});
  }
  return {{"resources", res},
          {"total_inertia", d.total_inertia},
          {"total_pfr_ramp", d.total_pfr_ramp},
          {"total_pfr_droop", d.total_pfr_droop},
          {"largest_contingency", d.largest_contingency},
          {"objective", d.objective},
          {"x", d.x}};
}

DispatchSolution dispatch_from_json(const json& doc) {
  try {
    DispatchSolution d;
    for (const auto& r : doc.at("resources")) {
      ResourceDispatch rd;
      rd.id = r.at("id").get<std::string>();
      rd.is_ibr = r.at("is_ibr").get<bool>();
      rd.energy = r.at("energy").get<double>();
      rd.pfr_ramp = r.at("pfr_ramp").get<double>();
      rd.pfr_droop = r.at("pfr_droop").get<double>();
      rd.inertia = r.at("inertia").get<double>();
      rd.inertia_factor = r.at("inertia_factor").get<double>();
      rd.soc_end = r.at("soc_end").get<double>();
      rd.loss = r.at("loss").get<double>();
      d.resources.push_back(rd);
    }
    d.total_inertia = doc.at("total_inertia").get<double>();
    d.total_pfr_ramp = doc.at("total_pfr_ramp").get<double>();
    d.total_pfr_droop = doc.at("total_pfr_droop").get<double>();
    d.largest_contingency = doc.at("largest_contingency").get<double>();
    d.objective = doc.at("objective").get<double>();
    d.x = doc.at("x").get<std::vector<double>>();
    return d;
  } catch (const json::exception& e) {
    throw ParseError(std::string("dispatch: ") + e.what());
  }
}

json prices_to_json(const PriceSet& p) {
  return {{"system_lambda", p.system_lambda}, {"ids", p.ids},
          {"energy", p.energy},               {"inertia", p.inertia},
          {"pfr_ramp", p.pfr_ramp},           {"pfr_droop", p.pfr_droop},
          {"setter_ids", p.setter_ids}};
}

PriceSet prices_from_json(const json& doc) {
  try {
    PriceSet p;
    p.system_lambda = doc.at("system_lambda").get<double>();
    p.ids = doc.at("ids").get<std::vector<std::string>>();
    p.energy = doc.at("energy").get<std::vector<double>>();
    p.inertia = doc.at("inertia").get<double>();
    p.pfr_ramp = doc.at("pfr_ramp").get<double>();
    p.pfr_droop = doc.at("pfr_droop").get<double>();
    p.setter_ids = doc.at("setter_ids").get<std::vector<std::string>>();
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("prices: ") + e.what());
  }
}

json duals_to_json(const DualSolution& d) {
  return {{"mu", d.mu},
          {"gamma1", d.gamma1},
          {"gamma2", d.gamma2},
          {"gamma3", d.gamma3},
          {"delta", d.delta},
          {"lambda_energy", d.lambda_energy},
          {"lambda_k", d.lambda_k},
          {"resource_ids", d.resource_ids},
          {"lambda_inertia", d.lambda_inertia},
          {"lambda_pfr_r", d.lambda_pfr_r},
          {"lambda_pfr_d", d.lambda_pfr_d}};
}

int cmd_run(const fs::path& scenario_path, const CommonOptions& opt, std::ostream& out) {
  const Scenario s = load_scenario_file(scenario_path);
  const BuildOptions bo = build_options(opt.mode);
  const fs::path dir = prepare_dir(output_dir(opt.out_dir));
  const std::string digest = scenario_digest(s);

  json doc{{"tool_version", kToolVersion}, {"scenario_digest", digest},
           {"mode", opt.mode},             {"tol", opt.tol},
           {"scenario", to_json(s)}};
  out << "sced " << kToolVersion << "\nscenario " << scenario_path.string() << "\ndigest   "
      << digest << "\nmode     " << opt.mode << '\n';

  ConicProblem pb;
  try {
    pb = build(s, bo);
  } catch (const InfeasibleError& e) {
    doc["status"] = "infeasible";
    doc["message"] = e.what();
    write_json(dir / "run.json", doc);
    out << "status   infeasible (" << e.what() << ")\n";
    return kInfeasible;
  }
  const SolveResult r = solve(pb, opt.tol);
  doc["status"] = std::string(to_string(r.report.status));
  doc["iterations"] = r.report.iterations;
  doc["relative_gap"] = r.report.relative_gap;
  out << "status   " << to_string(r.report.status) << " (" << r.report.iterations
      << " iterations, relative gap " << num(r.report.relative_gap, 3) << ")\n";

  if (r.report.status != SolveStatus::Optimal) {
    write_json(dir / "run.json", doc);
    return r.report.status == SolveStatus::Infeasible ? kInfeasible : kNumerical;
  }

  const PriceSet p = prices(r.dual, s.params);
  doc["objective"] = r.primal.objective;
  doc["dispatch"] = dispatch_to_json(r.primal);
  doc["prices"] = prices_to_json(p);
  doc["duals"] = duals_to_json(r.dual);
  out << "objective " << num(r.primal.objective, 10) << "\nlargest contingency "
      << num(r.primal.largest_contingency) << " MW\n\n";

  print_table(out, opt.format, "dispatch", kDispatchHeader, dispatch_rows(r.primal, false));
  out << '\n';
  print_table(out, opt.format, "prices", {"item", "resource", "value"}, price_rows(p, false));
  out << '\n';
  print_table(out, opt.format, "duals", {"name", "resource", "value"}, dual_rows(r.dual, false));

  if (r.primal.largest_contingency > 0.0 && r.primal.total_inertia > 0.0) {
    const SecurityReport sec = security_check(r.primal, s.params);
    doc["security"] = security_to_json(sec);
    out << '\n';
    print_table(out, opt.format, "security", {"limit", "value", "bound", "result"},
                security_rows(sec, s.params));
  } else {
    doc["security"] = {{"skipped", "no contingency or no inertia to simulate"}};
  }

  write_json(dir / "run.json", doc);
  write_csv(dir / "dispatch.csv", kDispatchHeader, dispatch_rows(r.primal, true));
  write_csv(dir / "prices.csv", {"item", "resource", "value"}, price_rows(p, true));
  write_csv(dir / "duals.csv", {"name", "resource", "value"}, dual_rows(r.dual, true));
  out << "\nartifacts in " << dir.string() << '\n';
  return kOk;
}

int cmd_sweep(const fs::path& scenario_path, const std::string& parameter,
              const std::vector<double>& values, const CommonOptions& opt, std::ostream& out) {
  if (values.empty()) throw ValidationError("values", "empty value list");
  const Scenario base = load_scenario_file(scenario_path);
  const BuildOptions bo = build_options(opt.mode);

  std::vector<Scenario> cases;
  for (double v : values) {
    Scenario s = base;
    apply_parameter(s, parameter, v);
    validate(s);
    cases.push_back(std::move(s));
  }

  std::vector<std::future<SweepPoint>> jobs;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      SweepPoint pt;
      pt.value = values[i];
      try {
        const SolveResult r = solve(build(cases[i], bo), opt.tol);
        pt.status = std::string(to_string(r.report.status));
        if (r.report.status == SolveStatus::Optimal) {
          const PriceSet p = prices(r.dual, cases[i].params);
          pt.objective = r.primal.objective;
          pt.lambda_energy = p.system_lambda;
          pt.inertia = p.inertia;
          pt.pfr_ramp = p.pfr_ramp;
          pt.pfr_droop = p.pfr_droop;
          pt.largest_contingency = r.primal.largest_contingency;
        }
      } catch (const InfeasibleError&) {
        pt.status = "infeasible";
      }
      return pt;
    }));
  }
  std::vector<SweepPoint> points;
  for (auto& j : jobs) points.push_back(j.get());

  const Row header{parameter, "status", "objective", "lambda_energy", "inertia_price",
                   "pfr_ramp_price", "pfr_droop_price", "largest_contingency_mw"};
  std::vector<Row> shown, saved;
  std::vector<double> obj, lam, inertia, ramp;
  int code = kOk;
  for (const auto& pt : points) {
    shown.push_back({num(pt.value), pt.status, num(pt.objective, 10), num(pt.lambda_energy),
                     num(pt.inertia), num(pt.pfr_ramp), num(pt.pfr_droop),
                     num(pt.largest_contingency)});
    saved.push_back({exact(pt.value), pt.status, exact(pt.objective), exact(pt.lambda_energy),
                     exact(pt.inertia), exact(pt.pfr_ramp), exact(pt.pfr_droop),
                     exact(pt.largest_contingency)});
    if (pt.status == "optimal") {
      obj.push_back(pt.objective);
      lam.push_back(pt.lambda_energy);
      inertia.push_back(pt.inertia);
      ramp.push_back(pt.pfr_ramp);
    } else if (pt.status == "infeasible") {
      code = std::max<int>(code, kInfeasible);
    } else {
      code = kNumerical;
    }
  }
  const fs::path dir = prepare_dir(output_dir(opt.out_dir));
  write_csv(dir / "sweep.csv", header, saved);
  print_table(out, opt.format, "sweep over " + parameter, header, shown);
  out << '\n';
  print_table(out, opt.format, "trend along the listed values", {"quantity", "trend"},
              {{"objective", trend(obj)},
               {"lambda_energy", trend(lam)},
               {"inertia_price", trend(inertia)},
               {"pfr_ramp_price", trend(ramp)}});
  return code;
}

int cmd_verify(const fs::path& run_dir, const VerifyOptions& v, const CommonOptions& opt,
               std::ostream& out) {
  const RunArtifact run = load_run(run_dir);
  const DispatchSolution d = dispatch_from_json(run.doc.at("dispatch"));
  const SystemParams& p = run.scenario.params;
  SecurityReport rep = security_check(d, p, v.loss, v.step, v.horizon);
  rep.trace.comments.insert(rep.trace.comments.begin(), kDigestKey + run.digest);

  const fs::path dir = prepare_dir(opt.out_dir ? *opt.out_dir : run_dir);
  {
    std::ofstream f(dir / "trace.csv");
    if (!f) throw Error("cannot write " + (dir / "trace.csv").string());
    write_trace(f, rep.trace);
  }
  json doc = security_to_json(rep);
  doc["scenario_digest"] = run.digest;
  doc["step_s"] = rep.trace.step;
  doc["samples"] = rep.trace.size();
  write_json(dir / "security.json", doc);

  out << "digest " << run.digest << "\nloss   " << num(rep.loss) << " MW\n";
  out << "nadir  " << num(rep.nadir_deviation) << " Hz at " << num(rep.nadir_time) << " s\n\n";
  print_table(out, opt.format, "security", {"limit", "value", "bound", "result"},
              security_rows(rep, p));
  out << "\ntrace  " << (dir / "trace.csv").string() << '\n';
  return rep.all_pass() ? kOk : kLimitViolation;
}

int cmd_settle(const fs::path& run_dir, const fs::path& trace_path, const SettleFlags& s,
               const CommonOptions& opt, std::ostream& out) {
  const RunArtifact run = load_run(run_dir);
  const FrequencyTrace trace = read_trace_file(trace_path);
  for (const auto& c : trace.comments) {
    if (c.rfind(kDigestKey, 0) == 0 && c.substr(kDigestKey.size()) != run.digest) {
      throw ValidationError("trace", "trace was produced for a different scenario");
    }
  }
  const DispatchSolution d = dispatch_from_json(run.doc.at("dispatch"));
  const PriceSet p = prices_from_json(run.doc.at("prices"));
  SettleOptions so;
  so.rtp_negative = s.rtp_negative;
  so.eta_adjust_ibrs = s.eta_adjust_ibrs;
  const SettlementStatement st = settle(run.scenario, p, d, trace, s.rtp, so);

  const fs::path dir = prepare_dir(opt.out_dir ? *opt.out_dir : run_dir);
  {
    std::ofstream f(dir / "statement.csv");
    if (!f) throw Error("cannot write " + (dir / "statement.csv").string());
    f << "# " << kDigestKey << run.digest << '\n';
    write_statement(f, st);
  }

  std::vector<Row> rows;
  for (const auto& r : st.resources) {
    rows.push_back({r.id, num(r.capacity_inertia), num(r.capacity_pfr_ramp),
                    num(r.capacity_pfr_droop), num(r.deployment_inertia_pos),
                    num(r.deployment_inertia_neg), num(r.deployment_pfr), num(r.total())});
  }
  out << "digest " << run.digest << "\nrtp    " << num(s.rtp) << " $/MWh\n\n";
  print_table(out, opt.format, "settlement ($)",
              {"resource", "cap_inertia", "cap_pfr_ramp", "cap_pfr_droop", "dep_inertia_pos",
               "dep_inertia_neg", "dep_pfr", "total"},
              rows);
  out << "\nintegration tolerance " << num(st.tolerance, 3) << " $\nstatement "
      << (dir / "statement.csv").string() << '\n';
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InfeasibleError*>(&e)) return kInfeasible;
  return kInputError;
}

}  // namespace sced::cli
