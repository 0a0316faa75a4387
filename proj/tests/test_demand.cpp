// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include <doctest.h>

#include <random>
#include <stdexcept>

#include "tempo/demand.hpp"

using namespace tempo;

TEST_CASE("day-type calendar: default divisor is 316.751 exactly") {
  DayTypeCalendar cal;
  CHECK(cal.divisor() == doctest::Approx(316.751).epsilon(1e-12));
  CHECK(std::abs(cal.divisor() - (251 + 0.679 * 51 + 0.494 * 63)) < 1e-9);
}

TEST_CASE("day-type calendar: divisor responds to every component") {
  DayTypeCalendar cal;
  cal.working_days = 250;
  CHECK(cal.divisor() == doctest::Approx(315.751));
  cal.saturday_factor = 1.0;
  cal.sunday_factor = 1.0;
  CHECK(cal.divisor() == doctest::Approx(250 + 51 + 63));
}

TEST_CASE("annual scaling composed with the noon share gives 53.4 per thousand") {
  // 1000 vehicles/year -> 3.15707... per working day -> 5.34% in the noon hour
  const double daily = annual_to_daily(1000.0);
  CHECK(daily == doctest::Approx(1000.0 / 316.751).epsilon(1e-12));
  const double noon = daily_to_hourly(1000.0, 12, HourlyProfile::default_noon_profile());
  CHECK(std::abs(noon - 53.4) < 1e-9);
}

TEST_CASE("noon profile: hours 13 and 14 recover the observed flows") {
  // The three observed hourly flows imply one daily total; fractions for
  // 13:00 and 14:00 must reproduce the other two observations from it.
  const HourlyProfile prof = HourlyProfile::default_noon_profile();
  const double daily = 3750.84 / prof.fraction(12);
  CHECK(daily_to_hourly(daily, 13, prof) == doctest::Approx(3694.65).epsilon(1e-9));
  CHECK(daily_to_hourly(daily, 14, prof) == doctest::Approx(4045.85).epsilon(1e-9));
}

TEST_CASE("hourly profile rejects bad hours and undefined lookups") {
  HourlyProfile prof;
  CHECK_THROWS_AS(prof.set(24, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(prof.set(-1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(prof.set(3, -0.2), std::invalid_argument);
  CHECK_THROWS_AS(prof.set(3, 1.2), std::invalid_argument);
  CHECK_FALSE(prof.defined(3));
  CHECK_THROWS_AS((void)prof.fraction(3), std::invalid_argument);
  prof.set(3, 0.25);
  CHECK(prof.defined(3));
  CHECK(prof.fraction(3) == 0.25);
  CHECK(prof.sum() == 0.25);
}

TEST_CASE("split_by_response conserves flow and covers the edges") {
  std::mt19937 rng(20260814);
  std::uniform_real_distribution<double> flow(0.0, 8000.0);
  std::uniform_real_distribution<double> rate(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double q = flow(rng);
    const double r = rate(rng);
    const FlowSplit s = split_by_response(q, r);
    CHECK(s.diverted_vph == doctest::Approx(q * r).epsilon(1e-12));
    CHECK(s.diverted_vph + s.remaining_vph == doctest::Approx(q).epsilon(1e-12));
    CHECK(s.diverted_vph >= 0.0);
    CHECK(s.remaining_vph >= 0.0);
  }
  CHECK(split_by_response(100.0, 0.0).diverted_vph == 0.0);
  CHECK(split_by_response(100.0, 1.0).remaining_vph == 0.0);
  CHECK_THROWS_AS(split_by_response(100.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(split_by_response(100.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(split_by_response(-5.0, 0.5), std::invalid_argument);
}

TEST_CASE("branch_split distributes proportionally and exactly") {
  const auto parts = branch_split(1000.0, {0.5, 0.5});
  REQUIRE(parts.size() == 2);
  CHECK(parts[0] == doctest::Approx(500.0));
  CHECK(parts[1] == doctest::Approx(500.0));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int i = 0; i < 200; ++i) {
    double w1 = u(rng), w2 = u(rng), w3 = u(rng);
    const double sum = w1 + w2 + w3;
    const auto p = branch_split(3000.0, {w1 / sum, w2 / sum, w3 / sum});
    CHECK(p[0] + p[1] + p[2] == doctest::Approx(3000.0).epsilon(1e-12));
    CHECK(p[0] / 3000.0 == doctest::Approx(w1 / sum).epsilon(1e-9));
  }
  CHECK_THROWS_AS(branch_split(100.0, {0.3, 0.3}), std::invalid_argument);
  CHECK_THROWS_AS(branch_split(100.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(branch_split(100.0, {1.2, -0.2}), std::invalid_argument);
}

TEST_CASE("headway: 60 over the flow, in minutes") {
  CHECK(headway_minutes(3750.84) == doctest::Approx(0.0160).epsilon(1e-2));
  CHECK(headway_minutes(60.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(headway_minutes(0.0), std::invalid_argument);
  CHECK_THROWS_AS(headway_minutes(-10.0), std::invalid_argument);
}
