// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/flowtime.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "tempo/ioutil.hpp"

namespace tempo {

double segment_speed(double flow_vph, double free_flow_kmh, int lanes,
                     const SpeedFlowParams& p) {
  if (flow_vph < 0.0) throw std::invalid_argument("segment_speed: negative flow");
  if (free_flow_kmh <= 0.0) throw std::invalid_argument("segment_speed: free-flow speed must be positive");
  if (lanes < 1) throw std::invalid_argument("segment_speed: lanes must be >= 1");
  if (p.lane_width_m <= 0.0) throw std::invalid_argument("segment_speed: lane width must be positive");
  // Flow density per metre of cross-section; speed drops with its square.
  const double x = flow_vph / (p.lane_width_m * lanes);
  const double v = free_flow_kmh - p.alpha * x * x;
  return std::max(v, p.floor_speed_kmh);
}

double segment_time_min(double length_km, double flow_vph, double free_flow_kmh,
                        int lanes, const SpeedFlowParams& p) {
  if (length_km <= 0.0) throw std::invalid_argument("segment_time_min: length must be positive");
  return 60.0 * length_km / segment_speed(flow_vph, free_flow_kmh, lanes, p);
}

double route_time_min(const Network& net, const Itinerary& itin,
                      const LinkFlows& background, const LinkFlows& added,
                      const SpeedFlowParams& p) {
  double total = 0.0;
  for (const auto& id : itin.link_ids) {
    const Link& l = net.link(id);
    const double q = background.get(id) + added.get(id);
    SpeedFlowParams local = p;
    local.lane_width_m = l.lane_width_m;  // per-link geometry wins over the default
    total += segment_time_min(l.length_km, q, l.free_flow_kmh, l.lanes, local);
  }
  return total;
}

void write_route_times_csv(const std::vector<RouteTimeRow>& rows, const std::string& path) {
  std::ostringstream out;
  out << "itinerary,travel_time_min,length_km\n";
  for (const RouteTimeRow& r : rows)
    out << r.itinerary << ',' << num_str(r.travel_time_min) << ',' << num_str(r.length_km)
        << '\n';
  write_text_file(path, out.str());
}

}  // namespace tempo
