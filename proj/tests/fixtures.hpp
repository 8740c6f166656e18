#pragma once

#include <random>
#include <string>

#include "sced/builder.hpp"
#include "sced/model.hpp"

namespace fixtures {

inline sced::SyncGenerator sg(const std::string& id, double pmin, double pmax, double a, double b,
                              double h, double droop = 20.0) {
  sced::SyncGenerator g;
  g.id = id;
  g.pmin = pmin;
  g.pmax = pmax;
  g.pgov_max = pmax;
  g.cost_a = a;
  g.cost_b = b;
  g.h = h;
  g.s_mva = pmax;
  g.droop_gain = droop;
  return g;
}

inline sced::InverterResource battery(const std::string& id, double pmin, double pmax) {
  sced::InverterResource j;
  j.id = id;
  j.pmin = pmin;
  j.pmax = pmax;
  j.emin = 0.0;
  j.emax = pmax * 3600.0;
  j.e0 = 0.5 * j.emax;
  j.eta = 0.9;
  j.d_max = 100.0;
  j.droop_gain = 20.0;
  j.cost_energy = 3.0;
  return j;
}

inline sced::SystemParams params(double demand) {
  return {60.0, 1.0, 0.8, 0.5, 6.0, 300.0, demand, sced::Direction::Up};
}

/// Six generators plus one storage unit, all SGs at inertia constant h.
inline sced::Scenario six_sg(double h) {
  sced::Scenario s;
  s.params = params(185.0);
  s.sgs = {sg("G1", 24, 80, 0.02, 2.0, h),     sg("G2", 24, 80, 0.0175, 1.75, h),
           sg("G3", 15, 50, 0.0625, 1.0, h),   sg("G4", 16.5, 55, 0.0083, 3.25, h),
           sg("G5", 9, 30, 0.025, 3.0, h),     sg("G6", 12, 40, 0.025, 3.0, h)};
  s.ibrs = {battery("B1", 0.0, 60.0)};
  return s;
}

/// One generator with loose frequency limits, paired with a storage unit
/// whose energy is too expensive to dispatch and whose services are free.
inline sced::Scenario single_sg_pair() {
  sced::Scenario s;
  s.params = params(50.0);
  s.params.rocof_max = 10.0;
  s.params.dfnad_max = 10.0;
  s.params.dfqss_max = 5.0;
  s.sgs = {sg("G1", 24, 80, 0.02, 2.0, 5.0)};
  sced::InverterResource j = battery("B1", -200.0, 200.0);
  j.cost_energy = 100.0;
  j.d_max = 100.0;
  j.droop_gain = 100.0;
  s.ibrs = {j};
  return s;
}

/// A must-run generator and an idle storage unit with symmetric limits, so
/// the Down problem is the exact mirror of the Up problem.
inline sced::Scenario mirror_pair() {
  sced::Scenario s;
  s.params = params(50.0);
  s.params.dfnad_max = 2.0;
  s.params.dfqss_max = 1.0;
  s.sgs = {sg("G1", 50, 50, 0.02, 2.0, 10.0, 60.0)};
  s.sgs[0].s_mva = 100.0;
  sced::InverterResource j = battery("B1", -100.0, 100.0);
  j.cost_energy = 100.0;
  j.cost_inertia = 0.05;
  j.cost_pfr_r = 0.02;
  j.cost_pfr_d = 0.03;
  j.droop_gain = 60.0;
  s.ibrs = {j};
  return s;
}

/// Three resources with an interior optimum, used for oracle comparisons.
inline sced::Scenario three_resource() {
  sced::Scenario s;
  s.params = params(60.0);
  s.params.dfnad_max = 1.0;
  s.params.dfqss_max = 0.6;
  s.sgs = {sg("G1", 10, 60, 0.02, 2.0, 6.0, 70.0), sg("G2", 5, 40, 0.03, 2.5, 5.0, 70.0)};
  sced::InverterResource j = battery("B1", -20.0, 30.0);
  j.cost_energy = 1.0;
  j.cost_inertia = 0.01;
  j.cost_pfr_r = 0.01;
  j.cost_pfr_d = 0.01;
  j.d_max = 80.0;
  j.droop_gain = 90.0;
  s.ibrs = {j};
  return s;
}

/// Two identical generators that tie for the largest contingency.
inline sced::Scenario twins() {
  sced::Scenario s;
  s.params = params(80.0);
  s.params.rocof_max = 2.0;
  s.params.dfnad_max = 1.5;
  s.params.dfqss_max = 1.0;
  s.sgs = {sg("A", 10, 60, 0.02, 2.0, 8.0, 100.0), sg("B", 10, 60, 0.02, 2.0, 8.0, 100.0)};
  sced::InverterResource j = battery("C", -20.0, 30.0);
  j.cost_energy = 8.0;
  j.droop_gain = 90.0;
  s.ibrs = {j};
  return s;
}

struct RandomCase {
  sced::Scenario scenario;
  sced::BuildOptions options;
};

/// Small instances (at most two SGs and one storage unit) for oracle checks.
inline RandomCase random_case(std::mt19937& rng, int index) {
  auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  RandomCase c;
  sced::Scenario& s = c.scenario;
  s.params = {60.0, u(0.5, 1.5), u(0.4, 1.0), 0.0, u(4.0, 8.0), 300.0, 0.0, sced::Direction::Up};
  s.params.dfqss_max = s.params.dfnad_max * u(0.4, 0.8);
  const int nsg = 1 + index % 2;
  const bool with_ibr = index % 3 != 0 || nsg == 1;
  double cap = 0.0;
  for (int i = 0; i < nsg; ++i) {
    sced::SyncGenerator g;
    g.id = "G" + std::to_string(i);
    g.pmin = u(5, 20);
    g.pmax = g.pmin + u(30, 60);
    g.pgov_max = g.pmax;
    g.cost_a = u(0.005, 0.05);
    g.cost_b = u(1, 4);
    g.h = u(1, 6);
    g.s_mva = g.pmax;
    g.droop_gain = u(40, 80);
    cap += g.pmax;
    s.sgs.push_back(g);
  }
  if (with_ibr) {
    sced::InverterResource j;
    j.id = "B";
    j.pmin = -u(0, 30);
    j.pmax = u(20, 50);
    j.emax = j.pmax * 3600.0;
    j.e0 = j.emax * u(0.3, 0.7);
    j.emin = j.emax * 0.05;
    j.eta = u(0.8, 1.0);
    j.d_max = u(40, 100);
    j.droop_gain = u(60, 120);
    j.cost_energy = u(0.5, 4);
    j.cost_inertia = u(0, 0.2);
    j.cost_pfr_r = u(0, 0.2);
    j.cost_pfr_d = u(0, 0.2);
    cap += j.pmax;
    s.ibrs.push_back(j);
  }
  s.params.demand = cap * u(0.25, 0.45);
  c.options.bidirectional = index % 2 == 1;
  return c;
}

}  // namespace fixtures
