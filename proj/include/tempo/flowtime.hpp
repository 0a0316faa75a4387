// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <string>
#include <vector>

#include "tempo/assignment.hpp"
#include "tempo/netmodel.hpp"

namespace tempo {

/// Speed-flow model constants: v = max(v_f - alpha * (q / (L_u * n))^2, floor).
/// q is an hourly flow, L_u the lane working width in meters. The quotient is
/// dimensionally informal but numerically fixed by alpha's calibration.
struct SpeedFlowParams {
  double alpha = 0.0001;
  double lane_width_m = 3.5;
  double floor_speed_kmh = 5.0;
};

/// Congested speed of a segment under hourly flow q; never below the floor.
double segment_speed(double q_vph, double free_flow_kmh, int lanes,
                     const SpeedFlowParams& p = {});

/// Congested traversal time in minutes.
double segment_time_min(double length_km, double q_vph, double free_flow_kmh,
                        int lanes, const SpeedFlowParams& p = {});

/// Sum of per-segment congested times along the itinerary, loading each link
/// with background + added flow. The per-link lane width overrides the
/// parameter default. Links absent from a flow map count as zero flow.
double route_time_min(const Network& net, const Itinerary& itin,
                      const LinkFlows& background, const LinkFlows& added,
                      const SpeedFlowParams& p = {});

struct RouteTimeRow {
  std::string itinerary;
  double travel_time_min = 0.0;
  double length_km = 0.0;
};

/// `itinerary,travel_time_min,length_km` report.
void write_route_times_csv(const std::vector<RouteTimeRow>& rows, const std::string& path);

}  // namespace tempo
