// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <array>
#include <optional>
#include <vector>

namespace tempo {

/// Day-type weighting used to scale an annual count down to a standard
/// working day. The defaults give the divisor
/// 251 + 0.679*51 + 0.494*63 = 316.751.
struct DayTypeCalendar {
  int working_days = 251;
  int saturdays = 51;
  int sundays_holidays = 63;
  double saturday_factor = 0.679;
  double sunday_factor = 0.494;

  double divisor() const;
};

/// Fraction of the daily flow per hour of day. A profile may be partial;
/// asking for an undefined hour is an error.
class HourlyProfile {
 public:
  /// Noon profile: hour 12 carries 5.34% of the daily flow; hours 13 and 14
  /// are back-computed from the observed hourly flows 3694.65 and 4045.85
  /// against the daily total implied by 3750.84 at noon.
  static HourlyProfile default_noon_profile();

  void set(int hour, double fraction);
  bool defined(int hour) const;
  double fraction(int hour) const;  // throws if undefined
  double sum() const;

 private:
  std::array<std::optional<double>, 24> fractions_{};
};

double annual_to_daily(double annual_flow, const DayTypeCalendar& cal = {});
double daily_to_hourly(double daily_flow, int hour, const HourlyProfile& profile);

struct FlowSplit {
  double diverted_vph = 0.0;
  double remaining_vph = 0.0;
};

/// Splits a flow into the share that follows diversion instructions and the
/// share that stays; the two parts sum back to the input exactly.
FlowSplit split_by_response(double flow_vph, double response_rate);

/// Distributes a diverted flow over branches proportionally to weights
/// (weights must sum to 1 within 1e-9).
std::vector<double> branch_split(double diverted_vph, const std::vector<double>& weights);

/// Mean headway in minutes per vehicle: 60 / flow.
double headway_minutes(double flow_vph);

}  // namespace tempo
