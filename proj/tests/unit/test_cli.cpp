#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "commands.hpp"
#include "sced/error.hpp"
#include "sced/settlement.hpp"

namespace fs = std::filesystem;
using namespace sced;
using namespace sced::cli;

namespace {

const fs::path kData = SCED_DATA_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("sced_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

CommonOptions in(const fs::path& dir, const std::string& mode = "bidirectional") {
  CommonOptions o;
  o.out_dir = dir;
  o.mode = mode;
  return o;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream f(p);
  return nlohmann::json::parse(f);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("run writes artifacts and reports infeasibility") {
    TempDir t;
    std::ostringstream out;
    CHECK(cmd_run(kData / "six_sg_low_si.json", in(t.path), out) == kOk);
    for (const char* f : {"run.json", "dispatch.csv", "prices.csv", "duals.csv"}) {
      CHECK(fs::exists(t.path / f));
    }
    const auto doc = read_json(t.path / "run.json");
    CHECK(doc.at("status") == "optimal");
    CHECK(doc.at("scenario_digest").get<std::string>().size() == 64);
    const auto dispatch = read_csv(t.path / "dispatch.csv");
    CHECK(dispatch[0][0] == "resource");
    CHECK(dispatch.size() == 8);

    TempDir bad;
    std::ostringstream out2;
    CHECK(cmd_run(kData / "infeasible_demand.json", in(bad.path), out2) == kInfeasible);
    CHECK(read_json(bad.path / "run.json").at("status") == "infeasible");
  }

  TEST_CASE("positive-only is never dearer than bidirectional") {
    TempDir a, b;
    std::ostringstream out;
    REQUIRE(cmd_run(kData / "six_sg_low_si.json", in(a.path, "positive-only"), out) == kOk);
    REQUIRE(cmd_run(kData / "six_sg_low_si.json", in(b.path, "bidirectional"), out) == kOk);
    const double pos = read_json(a.path / "run.json").at("objective");
    const double bi = read_json(b.path / "run.json").at("objective");
    CHECK(pos <= bi + 1e-6);
  }

  TEST_CASE("verify and settle a run") {
    TempDir t;
    std::ostringstream out;
    REQUIRE(cmd_run(kData / "six_sg_low_si.json", in(t.path), out) == kOk);
    CHECK(cmd_verify(t.path, {}, in(t.path), out) == kOk);
    CHECK(fs::exists(t.path / "trace.csv"));
    CHECK(read_json(t.path / "security.json").at("pass_nadir") == true);

    // symmetric excursion that returns to nominal
    const std::string digest = read_json(t.path / "run.json").at("scenario_digest");
    FrequencyTrace v;
    v.step = 0.01;
    v.comments = {"scenario_digest=" + digest};
    for (int i = 0; i <= 400; ++i) {
      const double tt = 0.01 * i;
      v.df.push_back(tt <= 2 ? -0.2 * tt : -0.2 * (4 - tt));
      v.dfdot.push_back(i == 200 ? 0.0 : (tt < 2 ? -0.2 : 0.2));
    }
    {
      std::ofstream f(t.path / "v.csv");
      write_trace(f, v);
    }
    SettleFlags flags;
    flags.rtp = 40.0;
    flags.eta_adjust_ibrs = false;
    CHECK(cmd_settle(t.path, t.path / "v.csv", flags, in(t.path), out) == kOk);
    std::map<std::string, double> net;
    for (const auto& row : read_csv(t.path / "statement.csv")) {
      if (row[1] == "deployment_inertia_pos" || row[1] == "deployment_inertia_neg") {
        net[row[0]] += std::stod(row[2]);
      }
    }
    CHECK(net.size() == 7);
    for (const auto& [id, value] : net) CHECK(std::abs(value) <= 1e-9);

    v.comments = {"scenario_digest=0000"};
    {
      std::ofstream f(t.path / "other.csv");
      write_trace(f, v);
    }
    CHECK_THROWS_AS(cmd_settle(t.path, t.path / "other.csv", flags, in(t.path), out),
                    ValidationError);
  }

  TEST_CASE("missing trace maps to an input error") {
    TempDir t;
    std::ostringstream out;
    REQUIRE(cmd_run(kData / "three_resource.json", in(t.path), out) == kOk);
    SettleFlags flags;
    flags.rtp = 40.0;
    try {
      cmd_settle(t.path, t.path / "missing.csv", flags, in(t.path), out);
      FAIL("expected an exception");
    } catch (const std::exception& e) {
      CHECK(exit_code_for(e) == kInputError);
    }
    CHECK(exit_code_for(InfeasibleError("x")) == kInfeasible);
  }

  TEST_CASE("sweep arguments") {
    TempDir t;
    std::ostringstream out;
    CHECK_THROWS_AS(cmd_sweep(kData / "three_resource.json", "demand", {}, in(t.path), out),
                    ValidationError);
    CHECK_THROWS_AS(cmd_sweep(kData / "three_resource.json", "colour", {1.0}, in(t.path), out),
                    ValidationError);
    CHECK_THROWS_AS(cmd_sweep(kData / "three_resource.json", "rocof_max", {-1.0}, in(t.path), out),
                    ValidationError);
  }

  TEST_CASE("energy price rises with demand") {
    TempDir t;
    std::ostringstream out;
    CHECK(cmd_sweep(kData / "six_sg_high_si.json", "demand", {150, 170, 185, 200}, in(t.path),
                    out) == kOk);
    const auto rows = read_csv(t.path / "sweep.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0][0] == "demand");
    for (std::size_t i = 2; i < rows.size(); ++i) {
      CHECK(rows[i][1] == "optimal");
      CHECK(std::stod(rows[i][3]) >= std::stod(rows[i - 1][3]) - 1e-6);
    }
  }

  TEST_CASE("dispatch and prices survive a JSON round trip") {
    TempDir t;
    std::ostringstream out;
    REQUIRE(cmd_run(kData / "three_resource.json", in(t.path), out) == kOk);
    const auto doc = read_json(t.path / "run.json");
    CHECK(dispatch_to_json(dispatch_from_json(doc.at("dispatch"))) == doc.at("dispatch"));
    CHECK(prices_to_json(prices_from_json(doc.at("prices"))) == doc.at("prices"));
  }

  TEST_CASE("mode names") {
    CHECK_FALSE(build_options("positive-only").bidirectional);
    CHECK(build_options("bidirectional").bidirectional);
    CHECK(build_options("down").direction == Direction::Down);
    CHECK_THROWS_AS(build_options("sideways"), ValidationError);
  }

  TEST_CASE("output directory falls back to the environment") {
    ::unsetenv("SCED_OUT_DIR");
    CHECK(output_dir(std::nullopt) == fs::path("sced_out"));
    ::setenv("SCED_OUT_DIR", "/tmp/sced_env_dir", 1);
    CHECK(output_dir(std::nullopt) == fs::path("/tmp/sced_env_dir"));
    CHECK(output_dir(fs::path("/tmp/flag")) == fs::path("/tmp/flag"));
    ::unsetenv("SCED_OUT_DIR");
  }
}
