// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/evacuation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tempo/assignment.hpp"
#include "tempo/ioutil.hpp"

namespace tempo {

void validate(const DepartureProfile& p) {
  double sum = 0.0;
  for (double f : p.fractions) {
    if (f < 0.0) throw std::invalid_argument("departure profile: fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("departure profile: fractions must sum to 1");
  if (p.slot_minutes <= 0.0)
    throw std::invalid_argument("departure profile: slot length must be positive");
}

long derive_fleet(long population, double in_town_fraction, long households,
                  long registered_vehicles) {
  if (population < 0 || households < 0 || registered_vehicles < 0)
    throw std::invalid_argument("derive_fleet: counts must be non-negative");
  if (in_town_fraction < 0.0 || in_town_fraction > 1.0)
    throw std::invalid_argument("derive_fleet: in-town fraction must lie in [0, 1]");
  return std::min(households, registered_vehicles);
}

namespace {

// Free-flow travel time between nodes in hours; infinity when unreachable.
double free_flow_hr(const Network& net, const std::string& from, const std::string& to) {
  if (from == to) return 0.0;
  try {
    const Itinerary it = shortest_path(net, from, to, std::nullopt);
    double hr = 0.0;
    for (const auto& id : it.link_ids) {
      const Link& l = net.link(id);
      hr += l.length_km / l.free_flow_kmh;
    }
    return hr;
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

void require_exits(const std::vector<ExitPoint>& exits) {
  if (exits.empty()) throw std::invalid_argument("exit allocation: no exit points given");
}

}  // namespace

ExitAssignment allocate_nearest(const Network& net, const std::vector<Zone>& zones,
                                const std::vector<ExitPoint>& exits) {
  require_exits(exits);
  ExitAssignment out;
  for (const Zone& z : zones) {
    double best = std::numeric_limits<double>::infinity();
    const ExitPoint* chosen = nullptr;
    for (const ExitPoint& e : exits) {
      const double hr = free_flow_hr(net, z.node, e.node);
      if (hr < best - 1e-12 || (hr < best + 1e-12 && chosen && e.id < chosen->id)) {
        best = hr;
        chosen = &e;
      }
    }
    if (!chosen || std::isinf(best))
      throw std::runtime_error("zone " + z.id + " cannot reach any exit point");
    out[z.id] = chosen->id;
  }
  return out;
}

ExitAssignment allocate_balanced(const Network& net, const std::vector<Zone>& zones,
                                 const std::vector<ExitPoint>& exits) {
  require_exits(exits);
  std::vector<Zone> order = zones;
  std::sort(order.begin(), order.end(), [](const Zone& a, const Zone& b) {
    if (a.vehicle_count != b.vehicle_count) return a.vehicle_count > b.vehicle_count;
    return a.id < b.id;
  });
  std::map<std::string, long> load;  // exit id -> assigned vehicles
  for (const ExitPoint& e : exits) load[e.id] = 0;
  ExitAssignment out;
  for (const Zone& z : order) {
    const ExitPoint* chosen = nullptr;
    for (const ExitPoint& e : exits) {
      if (std::isinf(free_flow_hr(net, z.node, e.node))) continue;
      if (!chosen || load[e.id] < load[chosen->id] ||
          (load[e.id] == load[chosen->id] && e.id < chosen->id))
        chosen = &e;
    }
    if (!chosen) throw std::runtime_error("zone " + z.id + " cannot reach any exit point");
    out[z.id] = chosen->id;
    load[chosen->id] += z.vehicle_count;
  }
  return out;
}

ExitAssignment allocate_override(ExitAssignment base, const ExitAssignment& overrides,
                                 const std::vector<Zone>& zones,
                                 const std::vector<ExitPoint>& exits) {
  for (const auto& [zone_id, exit_id] : overrides) {
    if (std::none_of(zones.begin(), zones.end(),
                     [&](const Zone& z) { return z.id == zone_id; }))
      throw std::runtime_error("override names unknown zone " + zone_id);
    if (std::none_of(exits.begin(), exits.end(),
                     [&](const ExitPoint& e) { return e.id == exit_id; }))
      throw std::runtime_error("override names unknown exit " + exit_id);
    base[zone_id] = exit_id;
  }
  return base;
}

std::vector<StagedSlice> staged_od(const ExitAssignment& assignment,
                                   const std::vector<Zone>& zones,
                                   const std::vector<ExitPoint>& exits,
                                   const DepartureProfile& profile) {
  validate(profile);
  std::map<std::string, std::string> exit_node;  // exit id -> node
  for (const ExitPoint& e : exits) exit_node[e.id] = e.node;

  std::vector<StagedSlice> slices(profile.fractions.size());
  for (std::size_t k = 0; k < slices.size(); ++k) {
    slices[k].offset_min = static_cast<double>(k) * profile.slot_minutes;
    slices[k].od.time_label = "t+" + num_str(slices[k].offset_min) + "min";
  }

  for (const Zone& z : zones) {
    auto it = assignment.find(z.id);
    if (it == assignment.end())
      throw std::runtime_error("staged_od: zone " + z.id + " has no exit assignment");
    auto en = exit_node.find(it->second);
    if (en == exit_node.end())
      throw std::runtime_error("staged_od: assignment for zone " + z.id +
                               " names unknown exit " + it->second);
    if (z.vehicle_count < 0)
      throw std::invalid_argument("staged_od: zone " + z.id + " has negative vehicles");

    // Largest-remainder rounding keeps the slot counts integral while their
    // sum stays exactly the zone fleet.
    std::array<long, 4> counts{};
    std::array<double, 4> remainders{};
    long assigned = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double exact = profile.fractions[k] * static_cast<double>(z.vehicle_count);
      counts[k] = static_cast<long>(std::floor(exact + 1e-9));
      remainders[k] = exact - static_cast<double>(counts[k]);
      assigned += counts[k];
    }
    std::array<std::size_t, 4> slot_order{0, 1, 2, 3};
    std::stable_sort(slot_order.begin(), slot_order.end(), [&](std::size_t a, std::size_t b) {
      return remainders[a] > remainders[b];
    });
    for (long leftover = z.vehicle_count - assigned; leftover > 0; --leftover)
      ++counts[slot_order[static_cast<std::size_t>(z.vehicle_count - assigned - leftover) % 4]];

    for (std::size_t k = 0; k < 4; ++k)
      if (counts[k] > 0)
        slices[k].od.entries[{z.node, en->second}] += static_cast<double>(counts[k]);
  }
  return slices;
}

namespace {

struct EvacVehicle {
  std::vector<std::size_t> path;  // link indices, origin to exit
  std::size_t leg = 0;
  double ready_min = 0.0;  // earliest step start at which it may leave its link
};

}  // namespace

EvacResult simulate_evacuation(const Network& net, const std::vector<StagedSlice>& slices,
                               const EvacParams& params) {
  if (params.step_min <= 0.0)
    throw std::invalid_argument("simulate_evacuation: step must be positive");
  if (params.horizon_min <= 0.0)
    throw std::invalid_argument("simulate_evacuation: horizon must be positive");

  // Routes are fixed free-flow shortest paths, resolved once per OD pair.
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> routes;
  struct Injection {
    long step = 0;
    std::pair<std::string, std::string> od;
    long vehicles = 0;
  };
  std::vector<Injection> injections;
  long fleet = 0;
  for (const StagedSlice& slice : slices) {
    const double steps = slice.offset_min / params.step_min;
    if (std::abs(steps - std::round(steps)) > 1e-6)
      throw std::invalid_argument("simulate_evacuation: slice offset " +
                                  num_str(slice.offset_min) + " min is not on the step grid");
    for (const auto& [od, demand] : slice.od.entries) {
      if (std::abs(demand - std::round(demand)) > 1e-6 || demand < 0.0)
        throw std::invalid_argument("simulate_evacuation: demand between " + od.first + " and " +
                                    od.second + " must be a whole vehicle count");
      const long vehicles = std::lround(demand);
      if (vehicles == 0) continue;
      if (!routes.count(od) && od.first != od.second) {
        Itinerary it;
        try {
          it = shortest_path(net, od.first, od.second, std::nullopt);
        } catch (const std::exception& e) {
          throw std::runtime_error(std::string("simulate_evacuation: ") + e.what());
        }
        std::vector<std::size_t> idx;
        for (const auto& id : it.link_ids) idx.push_back(net.link_index(id));
        routes[od] = std::move(idx);
      }
      injections.push_back({std::lround(steps), od, vehicles});
      fleet += vehicles;
    }
  }
  std::sort(injections.begin(), injections.end(), [](const Injection& a, const Injection& b) {
    if (a.step != b.step) return a.step < b.step;
    return a.od < b.od;
  });

  const std::size_t n_links = net.links().size();
  std::vector<EvacVehicle> vehicles;
  vehicles.reserve(static_cast<std::size_t>(fleet));
  std::vector<std::deque<std::size_t>> on_link(n_links);  // FIFO of vehicle ids
  std::vector<double> credit(n_links, 0.0);
  // Vehicles mid-transfer between steps: node -> incoming link id -> FIFO.
  std::map<std::string, std::map<std::string, std::deque<std::size_t>>> transfers;

  EvacResult result;
  std::map<std::string, long> exited;  // by exit node
  for (const StagedSlice& slice : slices)
    for (const auto& [od, demand] : slice.od.entries) exited[od.second] = 0;
  long exited_total = 0;
  long in_network = 0;
  std::size_t next_injection = 0;

  auto entry_ready = [&](std::size_t link_idx, double now_min,
                         const std::vector<long>& occupancy) {
    const Link& l = net.link_at(link_idx);
    SpeedFlowParams sp = params.speed;
    sp.lane_width_m = l.lane_width_m;
    const double q_vph = static_cast<double>(occupancy[link_idx]) * 60.0 / params.step_min;
    return now_min + segment_time_min(l.length_km, q_vph, l.free_flow_kmh, l.lanes, sp);
  };

  for (long step = 0;; ++step) {
    const double now = static_cast<double>(step) * params.step_min;
    if (now > params.horizon_min + 1e-9)
      throw std::runtime_error("simulate_evacuation: network not clear after " +
                               num_str(params.horizon_min) + " min");

    // Occupancy snapshot before anything lands this step; all entries during
    // the step are priced against it.
    std::vector<long> occupancy(n_links, 0);
    for (std::size_t i = 0; i < n_links; ++i)
      occupancy[i] = static_cast<long>(on_link[i].size());

    // Land the vehicles discharged last step, merging round-robin over
    // incoming links in link-id order.
    for (auto& [node, by_incoming] : transfers) {
      bool any = true;
      while (any) {
        any = false;
        for (auto& [incoming, fifo] : by_incoming) {
          if (fifo.empty()) continue;
          any = true;
          const std::size_t v = fifo.front();
          fifo.pop_front();
          EvacVehicle& veh = vehicles[v];
          const std::size_t next_link = veh.path[veh.leg];
          veh.ready_min = entry_ready(next_link, now, occupancy);
          on_link[next_link].push_back(v);
        }
      }
    }
    transfers.clear();

    // Departure-slot injections scheduled for this step.
    while (next_injection < injections.size() && injections[next_injection].step == step) {
      const Injection& inj = injections[next_injection];
      if (inj.od.first == inj.od.second) {
        // Zone sits on its exit: the fleet leaves the moment it departs.
        exited[inj.od.second] += inj.vehicles;
        exited_total += inj.vehicles;
      } else {
        const std::vector<std::size_t>& path = routes[inj.od];
        for (long k = 0; k < inj.vehicles; ++k) {
          EvacVehicle veh;
          veh.path = path;
          veh.leg = 0;
          veh.ready_min = entry_ready(path.front(), now, occupancy);
          vehicles.push_back(std::move(veh));
          on_link[path.front()].push_back(vehicles.size() - 1);
          ++in_network;
        }
      }
      ++next_injection;
    }

    EvacSample sample;
    sample.t_min = static_cast<int>(std::lround(now));
    sample.in_network = in_network;
    sample.exited_total = exited_total;
    sample.exited_per_node = exited;
    result.series.push_back(std::move(sample));

    if (in_network == 0 && next_injection == injections.size()) {
      result.clearance_time_min = now;
      break;
    }

    // Discharge FIFO heads up to each link's per-step capacity, banking
    // fractional capacity only while vehicles are actually waiting.
    for (std::size_t i = 0; i < n_links; ++i) {
      credit[i] += net.link_at(i).capacity_vph * params.step_min / 60.0;
      while (credit[i] >= 1.0 - 1e-9 && !on_link[i].empty() &&
             vehicles[on_link[i].front()].ready_min <= now + 1e-9) {
        credit[i] -= 1.0;
        const std::size_t v = on_link[i].front();
        on_link[i].pop_front();
        EvacVehicle& veh = vehicles[v];
        ++veh.leg;
        const Link& l = net.link_at(i);
        if (veh.leg == veh.path.size()) {
          exited[l.to_node] += 1;
          ++exited_total;
          --in_network;
        } else {
          transfers[l.to_node][l.id].push_back(v);
        }
      }
      if (on_link[i].empty() || vehicles[on_link[i].front()].ready_min > now + 1e-9)
        credit[i] = 0.0;
    }
  }

  result.per_exit_vehicles = exited;
  return result;
}

EvacScenario load_evac_scenario(const std::string& path, const Network& net) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("evacuation scenario " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw std::runtime_error("evacuation scenario " + path + ": not an object");

  EvacScenario sc;
  if (!doc.contains("zones") || !doc["zones"].is_array() || doc["zones"].empty())
    throw std::runtime_error("evacuation scenario " + path + ": needs a non-empty 'zones' array");
  for (const auto& jz : doc["zones"]) {
    Zone z;
    if (!jz.contains("id") || !jz["id"].is_string() || !jz.contains("node") ||
        !jz["node"].is_string() || !jz.contains("vehicles") ||
        !jz["vehicles"].is_number_integer())
      throw std::runtime_error("evacuation scenario " + path +
                               ": each zone needs string id/node and integer vehicles");
    z.id = jz["id"].get<std::string>();
    z.node = jz["node"].get<std::string>();
    z.vehicle_count = jz["vehicles"].get<long>();
    if (z.vehicle_count < 0)
      throw std::runtime_error("evacuation scenario " + path + ": zone " + z.id +
                               " has negative vehicles");
    if (!net.has_node(z.node))
      throw std::runtime_error("evacuation scenario " + path + ": zone " + z.id +
                               " references unknown node " + z.node);
    if (std::any_of(sc.zones.begin(), sc.zones.end(),
                    [&](const Zone& other) { return other.id == z.id; }))
      throw std::runtime_error("evacuation scenario " + path + ": duplicate zone id " + z.id);
    sc.zones.push_back(std::move(z));
  }

  if (!doc.contains("exits") || !doc["exits"].is_array() || doc["exits"].empty())
    throw std::runtime_error("evacuation scenario " + path + ": needs a non-empty 'exits' array");
  for (const auto& je : doc["exits"]) {
    ExitPoint e;
    if (!je.contains("id") || !je["id"].is_string() || !je.contains("node") ||
        !je["node"].is_string())
      throw std::runtime_error("evacuation scenario " + path +
                               ": each exit needs string id and node");
    e.id = je["id"].get<std::string>();
    e.node = je["node"].get<std::string>();
    if (!net.has_node(e.node))
      throw std::runtime_error("evacuation scenario " + path + ": exit " + e.id +
                               " references unknown node " + e.node);
    if (std::any_of(sc.exits.begin(), sc.exits.end(),
                    [&](const ExitPoint& other) { return other.id == e.id; }))
      throw std::runtime_error("evacuation scenario " + path + ": duplicate exit id " + e.id);
    sc.exits.push_back(std::move(e));
  }

  if (doc.contains("strategy")) {
    if (!doc["strategy"].is_string())
      throw std::runtime_error("evacuation scenario " + path + ": strategy must be a string");
    sc.strategy = doc["strategy"].get<std::string>();
    if (sc.strategy != "" && sc.strategy != "nearest" && sc.strategy != "balanced" &&
        sc.strategy != "override")
      throw std::runtime_error("evacuation scenario " + path + ": unknown strategy '" +
                               sc.strategy + "'");
  }

  if (doc.contains("overrides")) {
    if (!doc["overrides"].is_object())
      throw std::runtime_error("evacuation scenario " + path +
                               ": overrides must map zone ids to exit ids");
    for (const auto& [zone_id, exit_id] : doc["overrides"].items()) {
      if (!exit_id.is_string())
        throw std::runtime_error("evacuation scenario " + path + ": override for zone " +
                                 zone_id + " must name an exit id");
      sc.overrides[zone_id] = exit_id.get<std::string>();
    }
  }

  if (!doc.contains("profiles") || !doc["profiles"].is_array() || doc["profiles"].empty())
    throw std::runtime_error("evacuation scenario " + path +
                             ": needs a non-empty 'profiles' array");
  for (const auto& jp : doc["profiles"]) {
    DepartureProfile p;
    if (!jp.contains("fractions") || !jp["fractions"].is_array() || jp["fractions"].size() != 4)
      throw std::runtime_error("evacuation scenario " + path +
                               ": each profile needs exactly 4 fractions");
    for (std::size_t k = 0; k < 4; ++k) {
      if (!jp["fractions"][k].is_number())
        throw std::runtime_error("evacuation scenario " + path +
                                 ": profile fractions must be numbers");
      p.fractions[k] = jp["fractions"][k].get<double>();
    }
    if (jp.contains("slot_minutes")) {
      if (!jp["slot_minutes"].is_number())
        throw std::runtime_error("evacuation scenario " + path +
                                 ": slot_minutes must be a number");
      p.slot_minutes = jp["slot_minutes"].get<double>();
    }
    try {
      validate(p);
    } catch (const std::exception& e) {
      throw std::runtime_error("evacuation scenario " + path + ": " + e.what());
    }
    sc.profiles.push_back(p);
  }
  return sc;
}

void write_evac_series_csv(const EvacResult& result, const std::string& path) {
  std::ostringstream out;
  out << "t_min,in_network,exited_total";
  for (const auto& [node, count] : result.per_exit_vehicles) out << ",exited_" << node;
  out << '\n';
  for (const EvacSample& s : result.series) {
    out << s.t_min << ',' << s.in_network << ',' << s.exited_total;
    for (const auto& [node, count] : result.per_exit_vehicles) {
      auto it = s.exited_per_node.find(node);
      out << ',' << (it == s.exited_per_node.end() ? 0 : it->second);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace tempo
