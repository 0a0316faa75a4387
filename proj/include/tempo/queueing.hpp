// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <string>
#include <vector>

namespace tempo {

/// Bottleneck and fundamental-diagram parameters for the input-output method.
/// mu1 is the trickle rate through the closed section, mu2 the discharge rate
/// once it reopens. mu1 = 1 veh/h is used exactly as configured, not rounded
/// to zero.
struct QueueParams {
  double q_max_vph = 6000.0;
  double jam_density_vpkm = 600.0;  // k_j, interpreted roadway-total
  double free_flow_kmh = 120.0;
  double critical_density_vpkm = 50.0;  // k_c
  double mu1_vph = 1.0;
  double mu2_vph = 6000.0;
  double bottleneck_speed_kmh = 0.5;  // v_mu1
  double bottleneck_length_km = 1.0;  // d
  double t_f_hr = 0.01;
  bool jam_density_per_lane = false;
  bool include_bottleneck_traversal = false;
};

void validate(const QueueParams& p);

/// Cumulative arrival count built from piecewise-constant hourly flows. Times
/// are hours since start_clock; N is piecewise linear and non-decreasing with
/// N(0) = 0.
class ArrivalCurve {
 public:
  ArrivalCurve(std::vector<double> hourly_rates_vph, double start_clock, double horizon_hr);

  double cumulative(double t_hr) const;  // N(t)
  double rate_at(double t_hr) const;
  double start_clock() const { return start_clock_; }
  double horizon_hr() const { return horizon_hr_; }
  const std::vector<double>& hourly_rates() const { return rates_; }
  std::vector<double> breakpoints() const;  // hour marks up to the horizon

 private:
  std::vector<double> rates_;  // one per whole hour, covers the horizon
  double start_clock_ = 0.0;
  double horizon_hr_ = 0.0;
};

/// Hours beyond the supplied flows extend at the last given rate.
ArrivalCurve build_arrivals(const std::vector<double>& flows_vph, double start_clock,
                            double horizon_hr);

struct HourlyRow {
  double from_clock = 0.0;
  double to_clock = 0.0;
  double flow_vph = 0.0;
  double headway_min = 0.0;
  long cumulative_veh = 0;  // running sum of per-hour flows rounded to vehicles
};

/// Flow / headway / cumulative table for the supplied hours.
std::vector<HourlyRow> hourly_table(const ArrivalCurve& arr);

/// Joint breakpoints of the cumulative arrival and departure curves.
struct CurvePoint {
  double t_hr = 0.0;  // since closure start
  double arrivals = 0.0;
  double departures = 0.0;
};

struct IoDiagram {
  std::vector<CurvePoint> points;
  double start_clock = 0.0;
  double closure_duration_hr = 0.0;
  double clearance_offset_hr = 0.0;  // first time the queue empties
};

struct DelayResult {
  double total_delay_veh_hr = 0.0;
  double avg_delay_min = 0.0;  // over vehicles that experience positive delay
  double max_delay_min = 0.0;
  double clearance_clock = 0.0;  // hours of day
  double clearance_offset_hr = 0.0;
  double max_queue_veh = 0.0;
  double max_queue_km = 0.0;
  double delayed_vehicles = 0.0;
  double bottleneck_traversal_min = 0.0;  // diagnostic: d / v_mu1
};

/// Departure curve construction: slope mu1 while the section is closed, then
/// the arrival-constrained reopening rate min(mu2, demand). Throws if the
/// curves never meet within the arrival horizon.
IoDiagram io_diagram(const ArrivalCurve& arr, double closure_duration_hr,
                     const QueueParams& p = {});

/// Delay statistics of the diagram: area between the curves, horizontal gaps,
/// queue maxima. include_bottleneck_traversal adds d/v_mu1 to the per-vehicle
/// delay statistics.
DelayResult io_delay(const ArrivalCurve& arr, double closure_duration_hr,
                     const QueueParams& p = {});

/// Physical back-of-queue distance implied by the maximum vertical gap.
double queue_extent_km(const DelayResult& res, int lanes, const QueueParams& p = {});

enum class DelayStatistic { average_over_delayed, maximum, percentile };

std::string_view to_string(DelayStatistic s);
DelayStatistic delay_statistic_from_string(std::string_view s);

/// Reads the chosen statistic off a result; percentile is resolved against
/// the diagram's per-vehicle delay distribution.
double delay_statistic_min(const DelayResult& res, const IoDiagram& dia,
                           DelayStatistic stat, double percentile = 0.9);

/// One duration bracket of an event-duration ladder: delays for durations in
/// (lo_hr, hi_hr] are represented by a single evaluation.
struct DurationBracket {
  double lo_hr = 0.0;
  double hi_hr = 0.0;
};

struct BracketSweepEntry {
  DelayStatistic statistic = DelayStatistic::maximum;
  double rep_fraction = 0.5;  // representative duration = lo + f*(hi-lo)
  bool traversal = false;
  std::vector<double> delays_min;
  double max_rel_err = 0.0;  // vs. targets, when given
};

/// Evaluates every (statistic, representative-duration fraction, traversal
/// flag) combination over the brackets; when targets are supplied the entries
/// come back sorted by worst-case relative error, best first.
std::vector<BracketSweepEntry> bracket_delay_sweep(
    const ArrivalCurve& arr, const QueueParams& p,
    const std::vector<DurationBracket>& brackets,
    const std::vector<double>& target_delays_min = {});

/// Plot-ready `t_hr,N_arrivals,D_departures,queue_veh` export: every
/// breakpoint plus uniform 1-minute samples, in clock hours, with counts
/// rounded to whole vehicles.
void write_curve_csv(const IoDiagram& dia, const std::string& path);

}  // namespace tempo
