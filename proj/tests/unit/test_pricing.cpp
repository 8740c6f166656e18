#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "case_study.hpp"
#include "fixtures.hpp"
#include "sced/error.hpp"
#include "sced/pricing.hpp"

using namespace sced;

namespace {

DualSolution duals_of(const case_study::Row& r) {
  DualSolution d;
  d.mu = r.mu;
  d.gamma1 = r.gamma1;
  d.gamma2 = r.gamma2;
  d.gamma3 = r.gamma3;
  d.delta = r.delta;
  return d;
}

SystemParams calibrated() {
  SystemParams p = fixtures::params(185.0);
  p.rocof_max = 1.0;
  return p;
}

}  // namespace

TEST_SUITE("pricing") {
  TEST_CASE("inertia price from the high inertia multipliers") {
    DualSolution d;
    d.gamma1 = 0.0979;
    d.gamma3 = 0.1958;
    const PriceSet p = prices(d, calibrated());
    CHECK(p.inertia == doctest::Approx(0.04895).epsilon(1e-9));
    CHECK(std::round(p.inertia * 100) / 100 == doctest::Approx(0.05));
  }

  TEST_CASE("inertia price from the low inertia bidirectional multipliers") {
    DualSolution d;
    d.gamma1 = 0.1465;
    d.gamma3 = 2.0587;
    CHECK(prices(d, calibrated()).inertia == doctest::Approx(0.9561).epsilon(1e-9));
  }

  TEST_CASE("all printed rows reproduce the inertia price column") {
    for (const auto& row : case_study::kRows) {
      CHECK(std::abs(prices(duals_of(row), calibrated()).inertia - row.inertia_price) <= 0.005);
    }
  }

  TEST_CASE("zero multipliers") {
    DualSolution d;
    d.lambda_energy = 3.5;
    d.resource_ids = {"G1", "B1"};
    d.lambda_k = {0.0, 0.0};
    const PriceSet p = prices(d, calibrated());
    CHECK(p.inertia == 0.0);
    CHECK(p.pfr_ramp == 0.0);
    CHECK(p.pfr_droop == 0.0);
    CHECK(p.energy == std::vector<double>{3.5, 3.5});
    CHECK(p.setter_ids.empty());
  }

  TEST_CASE("mismatched contingency multipliers") {
    DualSolution d;
    d.resource_ids = {"G1", "B1"};
    d.lambda_k = {0.0};
    CHECK_THROWS_AS(prices(d, calibrated()), PreconditionError);
  }

  TEST_CASE("closed forms agree with the aggregate row multipliers") {
    for (const Scenario& s : {fixtures::six_sg(5.0), fixtures::six_sg(1.0),
                              fixtures::three_resource(), fixtures::twins()}) {
      const SolveResult r = solve(build(s));
      REQUIRE(r.report.status == SolveStatus::Optimal);
      const PriceSet p = prices(r.dual, s.params);
      CHECK(p.inertia == doctest::Approx(r.dual.lambda_inertia).epsilon(1e-6));
      CHECK(p.pfr_ramp == doctest::Approx(r.dual.lambda_pfr_r).epsilon(1e-6));
      CHECK(p.pfr_droop == doctest::Approx(r.dual.lambda_pfr_d).epsilon(1e-6));
      CHECK(p.inertia >= -1e-9);
      CHECK(p.pfr_ramp >= -1e-9);
      for (std::size_t k = 0; k < p.energy.size(); ++k) {
        CHECK(p.energy[k] <= p.system_lambda + 1e-9);
      }
    }
  }

  TEST_CASE("interior storage inertia is priced at its offer") {
    Scenario s = fixtures::three_resource();
    s.ibrs[0].cost_inertia = 0.05;
    const SolveResult r = solve(build(s));
    REQUIRE(r.report.status == SolveStatus::Optimal);
    const auto& b = r.primal.resources.back();
    const double pin_max = s.ibrs[0].d_max * s.params.rocof_max;
    if (b.inertia > 1e-4 && b.inertia < pin_max - 1e-4) {
      // Only the inertia definition row and the cost touch an interior P^In
      // when headroom rows are slack; otherwise the headroom multiplier adds.
      CHECK(prices(r.dual, s.params).inertia >= 0.05 - 1e-6);
    }
  }

  TEST_CASE("tied generators both set the contingency") {
    const Scenario s = fixtures::twins();
    const SolveResult r = solve(build(s));
    REQUIRE(r.report.status == SolveStatus::Optimal);
    const auto ids = contingency_setter(r.primal, r.dual, setter_tolerance(r.dual));
    CHECK(ids == std::vector<std::string>{"A", "B"});
    for (const auto& res : r.primal.resources) {
      if (std::find(ids.begin(), ids.end(), res.id) != ids.end()) {
        CHECK(res.energy == doctest::Approx(r.primal.largest_contingency).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("storage sets the contingency in the low inertia bidirectional case") {
    const SolveResult r = solve(build(fixtures::six_sg(1.0)));
    REQUIRE(r.report.status == SolveStatus::Optimal);
    const auto ids = contingency_setter(r.primal, r.dual, setter_tolerance(r.dual));
    CHECK(std::find(ids.begin(), ids.end(), "B1") != ids.end());
    CHECK(r.primal.resources.back().energy ==
          doctest::Approx(r.primal.largest_contingency).epsilon(1e-6));
  }

  TEST_CASE("no binding contingency row gives no setter") {
    DualSolution d;
    d.resource_ids = {"G1"};
    d.lambda_k = {0.0};
    CHECK(contingency_setter({}, d, 1e-6).empty());
  }

  TEST_CASE("setter tolerance scales with the system lambda") {
    DualSolution d;
    d.lambda_energy = 0.5;
    CHECK(setter_tolerance(d) == 1e-6);
    d.lambda_energy = 40.0;
    CHECK(setter_tolerance(d) == doctest::Approx(4e-5));
  }
}
