// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/demand.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tempo {

double DayTypeCalendar::divisor() const {
  if (working_days <= 0 || saturdays <= 0 || sundays_holidays <= 0)
    throw std::invalid_argument("calendar day counts must be positive");
  if (!(saturday_factor > 0 && saturday_factor <= 1) ||
      !(sunday_factor > 0 && sunday_factor <= 1))
    throw std::invalid_argument("calendar factors must be in (0, 1]");
  return working_days + saturday_factor * saturdays + sunday_factor * sundays_holidays;
}

HourlyProfile HourlyProfile::default_noon_profile() {
  HourlyProfile p;
  p.set(12, 0.0534);
  p.set(13, 0.0534 * 3694.65 / 3750.84);
  p.set(14, 0.0534 * 4045.85 / 3750.84);
  return p;
}

void HourlyProfile::set(int hour, double fraction) {
  if (hour < 0 || hour > 23) throw std::invalid_argument("hour out of range: " + std::to_string(hour));
  if (fraction < 0 || fraction > 1)
    throw std::invalid_argument("hourly fraction must be in [0, 1]");
  auto prev = fractions_[hour];
  fractions_[hour] = fraction;
  if (sum() > 1.0 + 1e-9) {
    fractions_[hour] = prev;
    throw std::invalid_argument("hourly fractions sum beyond 1");
  }
}

bool HourlyProfile::defined(int hour) const {
  return hour >= 0 && hour <= 23 && fractions_[hour].has_value();
}

double HourlyProfile::fraction(int hour) const {
  if (!defined(hour))
    throw std::invalid_argument("hour " + std::to_string(hour) + " undefined in hourly profile");
  return *fractions_[hour];
}

double HourlyProfile::sum() const {
  double s = 0.0;
  for (const auto& f : fractions_)
    if (f) s += *f;
  return s;
}

double annual_to_daily(double annual_flow, const DayTypeCalendar& cal) {
  if (annual_flow < 0) throw std::invalid_argument("annual flow must be >= 0");
  return annual_flow / cal.divisor();
}

double daily_to_hourly(double daily_flow, int hour, const HourlyProfile& profile) {
  if (daily_flow < 0) throw std::invalid_argument("daily flow must be >= 0");
  return daily_flow * profile.fraction(hour);
}

FlowSplit split_by_response(double flow_vph, double response_rate) {
  if (flow_vph < 0) throw std::invalid_argument("flow must be >= 0");
  if (response_rate < 0 || response_rate > 1)
    throw std::invalid_argument("response rate must be in [0, 1]");
  FlowSplit s;
  s.diverted_vph = response_rate * flow_vph;
  s.remaining_vph = flow_vph - s.diverted_vph;  // conserves the flow exactly
  return s;
}

std::vector<double> branch_split(double diverted_vph, const std::vector<double>& weights) {
  if (diverted_vph < 0) throw std::invalid_argument("diverted flow must be >= 0");
  if (weights.empty()) throw std::invalid_argument("branch_split needs at least one weight");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("branch weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("branch weights must sum to 1 (got " + std::to_string(sum) + ")");
  std::vector<double> flows;
  flows.reserve(weights.size());
  for (double w : weights) flows.push_back(diverted_vph * w / sum);
  return flows;
}

double headway_minutes(double flow_vph) {
  if (!(flow_vph > 0)) throw std::invalid_argument("headway requires flow > 0");
  return 60.0 / flow_vph;
}

}  // namespace tempo
