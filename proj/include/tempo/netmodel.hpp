// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tempo {

enum class RoadClass { highway, local };

RoadClass road_class_from_string(std::string_view s);
std::string_view to_string(RoadClass c);

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

/// Great-circle (haversine) distance in km, mean Earth radius.
double great_circle_km(const LonLat& a, const LonLat& b);
double polyline_length_km(const std::vector<LonLat>& pts);

/// Directed road segment. A two-way road is two Link records.
struct Link {
  std::string id;
  std::string from_node;
  std::string to_node;
  double length_km = 0.0;
  int lanes = 1;
  double lane_width_m = 3.5;
  double free_flow_kmh = 0.0;
  double capacity_vph = 0.0;
  RoadClass road_class = RoadClass::local;
  bool closed = false;
  std::vector<LonLat> geometry;  // optional polyline, kept for serialization
};

/// Immutable directed road graph. All mutating scenario edits (closures,
/// barriers) produce new snapshots via apply_closure; instances are safe to
/// share across concurrent evaluations.
class Network {
 public:
  Network() = default;
  Network(std::vector<Link> links,
          std::map<std::string, std::optional<LonLat>> nodes,
          std::set<std::string> impassable_nodes = {});

  const std::vector<Link>& links() const { return links_; }
  const std::map<std::string, std::optional<LonLat>>& nodes() const { return nodes_; }
  const std::set<std::string>& impassable_nodes() const { return impassable_nodes_; }

  bool has_link(const std::string& id) const;
  bool has_node(const std::string& id) const;
  bool node_impassable(const std::string& id) const;
  const Link& link(const std::string& id) const;         // throws on unknown id
  std::size_t link_index(const std::string& id) const;   // throws on unknown id

  /// Outgoing links of a node, ordered by link id. Includes closed links;
  /// routing applies its own usability filter.
  const std::vector<std::size_t>& out_links(const std::string& node) const;
  const Link& link_at(std::size_t index) const { return links_[index]; }

 private:
  std::vector<Link> links_;  // sorted by id
  std::map<std::string, std::size_t> link_index_;
  std::map<std::string, std::optional<LonLat>> nodes_;
  std::set<std::string> impassable_nodes_;
  std::map<std::string, std::vector<std::size_t>> out_;
};

struct ClosureScenario {
  std::vector<std::string> closed_link_ids;  // nonempty
  double start_clock = 12.0;                 // hours of day
  double duration_hr = 1.0;
  std::vector<std::string> barrier_node_ids;
};

/// Origin-destination demand. Units are vehicles/hour for flow matrices and
/// plain vehicles for evacuation totals.
struct ODMatrix {
  std::map<std::pair<std::string, std::string>, double> entries;
  std::string time_label = "static";

  double demand(const std::string& o, const std::string& d) const;
  double total() const;
};

struct Zone {
  std::string id;
  std::string node;
  long vehicle_count = 0;
};

struct ExitPoint {
  std::string id;
  std::string node;
};

/// Parses and validates a GeoJSON road network.
///
/// Expected file shape: a FeatureCollection whose LineString features are the
/// links (properties: id, from_node, to_node, lanes, free_flow_kmh,
/// road_class, capacity_vph, optional lane_width_m, length_km, closed) and
/// whose optional Point features pin node coordinates (property: id).
/// Nodes referenced by from_node/to_node are created implicitly, taking their
/// coordinates from the link endpoints when no Point feature names them.
/// length_km is taken from the property when present, otherwise computed from
/// the geometry; a >10% declared-vs-computed mismatch emits a warning and the
/// declared value wins.
Network load_network(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Writes the GeoJSON form; numeric link attributes are serialized at full
/// precision so load_network(save_network(net)) reproduces them bit-exactly.
void save_network(const Network& net, const std::string& path);

/// Returns a copy of the network with the scenario's links marked closed and
/// barrier nodes made impassable. Idempotent; the input is untouched.
Network apply_closure(const Network& net, const ClosureScenario& c);

/// Loads a `origin,destination,demand[,time_label]` CSV. Duplicate
/// origin-destination rows aggregate by summation. Rows are validated against
/// the network; errors name the failing line.
ODMatrix load_od(const std::string& path, const Network& net);

/// Checks every OD pair has at least one open path; throws naming the first
/// unroutable pair.
void validate_connectivity(const Network& net, const ODMatrix& od);

}  // namespace tempo
