// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)
//
// Acceptance gate: nine end-to-end checks, one PASS/FAIL line each. The
// process exit code is the number of failed checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tempo/activation.hpp"
#include "tempo/assignment.hpp"
#include "tempo/demand.hpp"
#include "tempo/evacuation.hpp"
#include "tempo/flowtime.hpp"
#include "tempo/ioutil.hpp"
#include "tempo/netmodel.hpp"
#include "tempo/queueing.hpp"

using namespace tempo;

namespace {

const std::string kDataDir = TEMPO_DATA_DIR;

struct Checker {
  std::ostringstream detail;
  bool ok = true;

  void expect(bool condition, const std::string& what) {
    if (condition) return;
    if (!ok) detail << "; ";
    detail << what;
    ok = false;
  }

  void expect_near(double got, double want, double tol, const std::string& what) {
    std::ostringstream msg;
    msg << what << ": got " << got << ", want " << want << " +/- " << tol;
    expect(std::abs(got - want) <= tol, msg.str());
  }

  void expect_rel(double got, double want, double rel, const std::string& what) {
    std::ostringstream msg;
    msg << what << ": got " << got << ", want " << want << " within " << rel * 100 << "%";
    expect(std::abs(got - want) <= rel * std::abs(want), msg.str());
  }
};

// ---------------------------------------------------------------------------

void annual_scaling(Checker& c) {
  c.expect_near(DayTypeCalendar{}.divisor(), 316.751, 1e-9, "day-type divisor");
  c.expect_near(daily_to_hourly(1000.0, 12, HourlyProfile::default_noon_profile()), 53.4, 1e-9,
                "noon share of 1000 daily vehicles");
}

void hourly_arrival_table(Checker& c) {
  const ArrivalCurve arr = build_arrivals({3750.84, 3694.65, 4045.85}, 12.0, 3.0);
  const std::vector<HourlyRow> rows = hourly_table(arr);
  c.expect(rows.size() == 3, "expected three hourly rows");
  if (rows.size() != 3) return;
  const long want_cumulative[] = {3751, 7446, 11492};
  const char* want_headway[] = {"0.0160", "0.0162", "0.0148"};
  for (std::size_t i = 0; i < 3; ++i) {
    c.expect(rows[i].cumulative_veh == want_cumulative[i],
             "cumulative count in hour " + std::to_string(i + 1) + ": got " +
                 std::to_string(rows[i].cumulative_veh));
    c.expect(fixed_str(rows[i].headway_min, 4) == want_headway[i],
             "headway in hour " + std::to_string(i + 1) + ": got " +
                 fixed_str(rows[i].headway_min, 4));
  }
}

void activation_tables(Checker& c) {
  const auto fixtures = load_activation_fixtures(kDataDir + "/fixtures/activation_paper.json");
  const std::vector<double> durations = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  const ActivationPlan plan = activation_plan(durations, 0.6, fixtures.at(0.6));
  c.expect(plan.cells.size() == 24, "expected 24 decision cells");
  if (plan.cells.size() != 24) return;

  // Per comparison block: expected decision string and main-route totals.
  struct Block {
    const char* label;
    const char* decisions;
    double totals[6];
  };
  const Block blocks[] = {
      {"micro alone", "hhhhhh", {37.6, 37.6, 97.4, 97.4, 157.4, 157.4}},
      {"macro left", "hhaaaa", {183.4, 183.4, 243.2, 243.2, 303.2, 303.2}},
      {"macro right", "hhaaaa", {115.9, 115.9, 175.7, 175.7, 235.7, 235.7}},
      {"micro after macros", "hhhhaa", {23.6, 23.6, 62.8, 62.8, 122.0, 122.0}},
  };
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::size_t i = 0; i < 6; ++i) {
      const ActivationCell& cell = plan.cells[b * 6 + i];
      const char want = blocks[b].decisions[i];
      const char got = cell.decision == Decision::activate ? 'a' : 'h';
      std::ostringstream what;
      what << blocks[b].label << " at " << cell.duration_hr << " h";
      c.expect(got == want, what.str() + ": decision flipped");
      c.expect_near(cell.t_main_total_min, blocks[b].totals[i], 0.05,
                    what.str() + " main-route total");
    }
  }
}

void strategy_sweep(Checker& c) {
  const auto fixtures = load_activation_fixtures(kDataDir + "/fixtures/activation_paper.json");
  const std::vector<double> durations = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  const auto rows = response_sweep({0.3, 0.4, 0.5, 0.6, 0.7}, durations,
                                   [&](double r) { return fixtures.at(r); });

  const std::vector<std::vector<std::string>> want = {
      {"Activating the left macro route right away",
       "Activating the right macro route after 1.5 hours", "No activation of the micro route"},
      {"Activating the left and right macro routes after 1.5 hours",
       "No activation of the micro route"},
      {"Activating the left and right macro routes after 1.5 hours",
       "No activation of the micro route"},
      {"Activating the left and right macro routes after 1.5 hours",
       "Activating the micro route after 2.5 hours"},
      {"Activating the left and right macro routes after 1.5 hours",
       "Activating the micro route after 2.5 hours"},
  };
  c.expect(rows.size() == want.size(), "expected five sweep rows");
  for (std::size_t i = 0; i < rows.size() && i < want.size(); ++i) {
    std::ostringstream what;
    what << "strategy at response rate " << rows[i].response_rate;
    c.expect(rows[i].plan.strategy == want[i], what.str());
  }
}

void bottleneck_delays(Checker& c) {
  const QueueParams qp;  // trickle 1 vph during the closure, 6000 vph after

  // Closed-form constant-arrival case: 3000 vph for ever, one hour closed.
  const ArrivalCurve constant = build_arrivals({3000.0}, 12.0, 4.0);
  const DelayResult closed_form = io_delay(constant, 1.0, qp);
  c.expect_rel(closed_form.avg_delay_min, 30.0, 0.001, "constant-arrival average delay");
  c.expect_rel(closed_form.max_delay_min, 60.0, 0.001, "constant-arrival maximum delay");
  c.expect_rel(closed_form.clearance_offset_hr, 2.0, 0.001, "constant-arrival clearance time");

  // Observed arrivals: the documented combination (maximum statistic at the
  // bracket midpoint, no bottleneck traversal) lands within 20% of the
  // published per-hour delay ladder.
  const ArrivalCurve observed = build_arrivals({3750.84, 3694.65, 4045.85}, 12.0, 12.0);
  const double reps[] = {0.5, 1.5, 2.5};
  const double targets[] = {26.1, 85.9, 145.9};
  for (int i = 0; i < 3; ++i) {
    const DelayResult res = io_delay(observed, reps[i], qp);
    std::ostringstream what;
    what << "delay for a closure around " << reps[i] << " h";
    c.expect_rel(res.max_delay_min, targets[i], 0.20, what.str());
  }
}

void assignment_oracle(Checker& c) {
  int networks_checked = 0;
  std::uint32_t seed = 0;
  std::mt19937 demand_rng(1234);
  std::uniform_real_distribution<double> demand(10.0, 2000.0);

  while (networks_checked < 50 && seed < 10000) {
    ++seed;
    const auto rn = oracles::random_network(seed);
    ODMatrix od;
    for (const auto& o : rn.node_ids)
      for (const auto& d : rn.node_ids) {
        if (o == d || od.entries.size() >= 5) continue;
        if (oracles::brute_force_shortest(rn.net, o, d))
          od.entries[{o, d}] = std::round(demand(demand_rng) * 4.0) / 4.0;
      }
    if (od.entries.empty()) continue;
    ++networks_checked;

    const LinkFlows got = aon_assign(rn.net, od);
    const auto want = oracles::brute_force_aon(rn.net, od);
    for (const auto& [id, flow] : want) {
      if (got.get(id) == flow) continue;
      std::ostringstream what;
      what << "seed " << seed << " link " << id << ": got " << got.get(id) << ", oracle "
           << flow;
      c.expect(false, what.str());
      return;
    }
  }
  c.expect(networks_checked == 50, "could not assemble 50 routable networks");
}

void speed_flow_properties(Checker& c) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> flow(0.0, 8000.0);
  std::uniform_real_distribution<double> speed(20.0, 140.0);
  std::uniform_int_distribution<int> lanes(1, 4);
  int tuples = 0;
  for (int i = 0; i < 1200; ++i) {
    const double q = flow(rng);
    const double vf = speed(rng);
    const int n = lanes(rng);
    const double v = segment_speed(q, vf, n);
    const double v_zero = segment_speed(0.0, vf, n);
    const double v_more = segment_speed(q * 1.25 + 10.0, vf, n);
    ++tuples;
    if (v < 5.0 || v > vf + 1e-12 || v_zero != vf || v_more > v + 1e-12) {
      std::ostringstream what;
      what << "violation at q=" << q << " vf=" << vf << " lanes=" << n;
      c.expect(false, what.str());
      return;
    }
  }
  c.expect(tuples >= 1000, "fewer than 1000 tuples sampled");
}

void evacuation_scenarios(Checker& c) {
  const Network net = load_network(kDataDir + "/rivertown/network.geojson");
  const EvacScenario sc = load_evac_scenario(kDataDir + "/rivertown/evacuation.json", net);
  long fleet = 0;
  for (const Zone& z : sc.zones) fleet += z.vehicle_count;

  const ExitAssignment nearest = allocate_nearest(net, sc.zones, sc.exits);
  const ExitAssignment balanced = allocate_balanced(net, sc.zones, sc.exits);
  const ExitAssignment rebalanced =
      allocate_override(balanced, sc.overrides, sc.zones, sc.exits);

  auto run = [&](const ExitAssignment& assignment, const DepartureProfile& profile) {
    const auto slices = staged_od(assignment, sc.zones, sc.exits, profile);
    const EvacResult res = simulate_evacuation(net, slices);
    long out = 0;
    for (const auto& [node, count] : res.per_exit_vehicles) out += count;
    c.expect(out == fleet && res.series.back().exited_total == fleet,
             "conservation: " + std::to_string(out) + " of " + std::to_string(fleet) +
                 " vehicles exited");
    return res;
  };

  // Determinism: an identical run produces the identical series.
  const auto slices = staged_od(balanced, sc.zones, sc.exits, sc.profiles[0]);
  const EvacResult once = simulate_evacuation(net, slices);
  const EvacResult twice = simulate_evacuation(net, slices);
  bool same = once.clearance_time_min == twice.clearance_time_min &&
              once.series.size() == twice.series.size();
  for (std::size_t i = 0; same && i < once.series.size(); ++i)
    same = once.series[i].in_network == twice.series[i].in_network &&
           once.series[i].exited_per_node == twice.series[i].exited_per_node;
  c.expect(same, "repeated simulation diverged");

  // Scenario ordering and profile-gap shrink across the strategy ladder.
  const double near_1 = run(nearest, sc.profiles[0]).clearance_time_min;
  const double near_2 = run(nearest, sc.profiles[1]).clearance_time_min;
  const double bal_1 = run(balanced, sc.profiles[0]).clearance_time_min;
  const double bal_2 = run(balanced, sc.profiles[1]).clearance_time_min;
  const double reb_1 = run(rebalanced, sc.profiles[0]).clearance_time_min;
  const double reb_2 = run(rebalanced, sc.profiles[1]).clearance_time_min;

  std::ostringstream ladder;
  ladder << "clearances " << near_1 << "/" << near_2 << " >= " << bal_1 << "/" << bal_2
         << " >= " << reb_1 << "/" << reb_2;
  c.expect(near_1 >= bal_1 && bal_1 >= reb_1 && near_1 > reb_1, ladder.str());
  c.expect(near_2 >= bal_2 && bal_2 >= reb_2 && near_2 > reb_2, ladder.str());

  const double gap_near = std::abs(near_1 - near_2);
  const double gap_bal = std::abs(bal_1 - bal_2);
  const double gap_reb = std::abs(reb_1 - reb_2);
  std::ostringstream gaps;
  gaps << "profile gaps " << gap_near << " -> " << gap_bal << " -> " << gap_reb;
  c.expect(gap_near >= gap_bal && gap_bal >= gap_reb && gap_near > gap_reb, gaps.str());
}

void staged_departure_exactness(Checker& c) {
  const std::vector<DepartureProfile> profiles = {DepartureProfile{{0.2, 0.5, 0.2, 0.1}},
                                                  DepartureProfile{{0.4, 0.1, 0.3, 0.2}}};
  const std::vector<ExitPoint> exits = {{"e1", "b"}};
  const ExitAssignment assignment = {{"z1", "e1"}};
  std::mt19937 rng(7);
  std::uniform_int_distribution<long> fleet(0, 5000);

  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<Zone> zones = {{"z1", "a", fleet(rng)}};
    for (const DepartureProfile& p : profiles) {
      double total = 0.0;
      for (const StagedSlice& s : staged_od(assignment, zones, exits, p))
        for (const auto& [od, demand] : s.od.entries) {
          (void)od;
          total += demand;
        }
      if (total != static_cast<double>(zones[0].vehicle_count)) {
        std::ostringstream what;
        what << "fleet " << zones[0].vehicle_count << " split into " << total;
        c.expect(false, what.str());
        return;
      }
    }
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<void(Checker&)> check;
  };
  const std::vector<Criterion> criteria = {
      {"annual-to-daily divisor and noon hourly share", annual_scaling},
      {"hourly arrival table: cumulative counts and headways", hourly_arrival_table},
      {"route-activation decision tables, all 24 cells", activation_tables},
      {"staged strategies across driver response rates", strategy_sweep},
      {"bottleneck delay: closed form exact, observed within 20%", bottleneck_delays},
      {"all-or-nothing assignment matches exhaustive enumeration", assignment_oracle},
      {"speed-flow bounds and monotonicity over 1200 tuples", speed_flow_properties},
      {"evacuation scenarios: conservation, determinism, ordering", evacuation_scenarios},
      {"staged departures split fleets exactly", staged_departure_exactness},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Checker c;
    try {
      criteria[i].check(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok ? "PASS" : "FAIL") << ": criterion " << (i + 1) << " — "
              << criteria[i].label;
    if (!c.ok) std::cout << " [" << c.detail.str() << "]";
    std::cout << '\n';
    if (!c.ok) ++failures;
  }
  return failures;
}
