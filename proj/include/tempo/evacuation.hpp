// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tempo/flowtime.hpp"
#include "tempo/netmodel.hpp"

namespace tempo {

/// Staged departures: fraction k of each zone's fleet enters the network at
/// offset k * slot_minutes after the evacuation order.
struct DepartureProfile {
  std::array<double, 4> fractions{};
  double slot_minutes = 15.0;
};

void validate(const DepartureProfile& p);  // fractions sum to 1 within 1e-9

/// One evacuating vehicle per household, capped by the registered fleet.
long derive_fleet(long population, double in_town_fraction, long households,
                  long registered_vehicles);

using ExitAssignment = std::map<std::string, std::string>;  // zone id -> exit id

/// Every zone exits at its minimum free-flow-time exit point; ties go to the
/// smallest exit id.
ExitAssignment allocate_nearest(const Network& net, const std::vector<Zone>& zones,
                                const std::vector<ExitPoint>& exits);

/// Zone-granular load balancing: zones in descending vehicle count, each to
/// the currently least-loaded reachable exit. Whole zones only, so exit loads
/// differ by at most the largest zone.
ExitAssignment allocate_balanced(const Network& net, const std::vector<Zone>& zones,
                                 const std::vector<ExitPoint>& exits);

/// Manual refinement of a base assignment.
ExitAssignment allocate_override(ExitAssignment base, const ExitAssignment& overrides,
                                 const std::vector<Zone>& zones,
                                 const std::vector<ExitPoint>& exits);

struct StagedSlice {
  double offset_min = 0.0;
  ODMatrix od;  // zone attachment node -> exit node, in whole vehicles
};

/// Splits each zone's fleet over the four departure slots with
/// largest-remainder rounding, so the slices sum to the fleet exactly.
std::vector<StagedSlice> staged_od(const ExitAssignment& assignment,
                                   const std::vector<Zone>& zones,
                                   const std::vector<ExitPoint>& exits,
                                   const DepartureProfile& profile);

struct EvacParams {
  double step_min = 1.0;
  double horizon_min = 720.0;  // runs past this are an error, never truncated
  SpeedFlowParams speed;
};

struct EvacSample {
  int t_min = 0;
  long in_network = 0;
  long exited_total = 0;
  std::map<std::string, long> exited_per_node;  // cumulative, by exit node
};

struct EvacResult {
  double clearance_time_min = 0.0;  // last vehicle out
  std::map<std::string, long> per_exit_vehicles;  // by exit node
  std::vector<EvacSample> series;                 // 1-minute resolution, ends at 0
};

/// Deterministic point-queue network loading at a 1-minute step. Vehicles
/// follow the free-flow shortest path of their OD pair; link entry speed is
/// the congested speed for the occupancy snapshot taken at the start of the
/// step (count scaled to an hourly rate); link exits discharge FIFO at most
/// capacity_vph * step vehicles per step, with merges interleaved round-robin
/// over incoming links in link-id order.
EvacResult simulate_evacuation(const Network& net, const std::vector<StagedSlice>& slices,
                               const EvacParams& params = {});

/// Scenario file: zones, exits, allocation strategy, overrides, departure
/// profiles.
struct EvacScenario {
  std::vector<Zone> zones;
  std::vector<ExitPoint> exits;
  std::string strategy;  // "nearest" | "balanced" | "override"; empty = all
  ExitAssignment overrides;
  std::vector<DepartureProfile> profiles;
};

EvacScenario load_evac_scenario(const std::string& path, const Network& net);

void write_evac_series_csv(const EvacResult& result, const std::string& path);

}  // namespace tempo
