// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tempo/netmodel.hpp"

namespace tempo {

/// Restricts routing to links of the given classes; nullopt admits all.
using ClassFilter = std::optional<std::set<RoadClass>>;

/// Per-link hourly flows. Holds an entry for every link of the network it was
/// built over; get() treats missing ids as zero so partial maps compose.
class LinkFlows {
 public:
  LinkFlows() = default;
  static LinkFlows zeros(const Network& net);

  double get(const std::string& link_id) const;
  void add(const std::string& link_id, double flow_vph);
  void set(const std::string& link_id, double flow_vph);
  const std::map<std::string, double>& entries() const { return flows_; }
  bool same_links(const LinkFlows& other) const;

 private:
  std::map<std::string, double> flows_;
};

enum class ItineraryKind { macro_left, macro_right, micro, hybrid, main };

std::string_view to_string(ItineraryKind k);
ItineraryKind itinerary_kind_from_string(std::string_view s);

/// A connected directed path of links. micro itineraries hold local links
/// only, macro itineraries highway links only.
struct Itinerary {
  ItineraryKind kind = ItineraryKind::main;
  std::vector<std::string> link_ids;
  double length_km = 0.0;
};

/// Validates connectivity, link uniqueness and the kind/class constraint;
/// computes the total length.
Itinerary make_itinerary(const Network& net, ItineraryKind kind,
                         std::vector<std::string> link_ids);

/// Minimum free-flow-travel-time path over open links admitted by the filter.
/// Ties are broken by the lexicographically smallest link-id sequence, so
/// results are reproducible across runs and platforms.
Itinerary shortest_path(const Network& net, const std::string& origin,
                        const std::string& destination,
                        const ClassFilter& filter = std::nullopt,
                        ItineraryKind kind = ItineraryKind::main);

/// All-or-nothing assignment: each OD pair's entire demand is loaded onto its
/// shortest path. Pairs are processed in sorted order; unroutable pairs are
/// reported by name.
LinkFlows aon_assign(const Network& net, const ODMatrix& od,
                     const ClassFilter& filter = std::nullopt);

struct DisruptionDiff {
  LinkFlows disrupted;  // flow lost relative to the base assignment
  LinkFlows diverted;   // flow gained relative to the base assignment
};

/// Per-link positive parts of base-closed and closed-base. A link is never
/// both disrupted and diverted.
DisruptionDiff disruption_diff(const LinkFlows& base, const LinkFlows& closed);

/// Shortest path between the diversion points over the closed network, with
/// the road-class filter implied by the itinerary kind (micro -> local only,
/// macro -> highway only, hybrid/main -> unfiltered).
Itinerary extract_itinerary(const Network& net, const ClosureScenario& closure,
                            const std::string& start, const std::string& end,
                            ItineraryKind kind);

void write_link_flows_csv(const LinkFlows& flows, const std::string& path);
void write_itinerary_csv(const Network& net, const Itinerary& itin, const std::string& path);

}  // namespace tempo
