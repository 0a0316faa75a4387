// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include <json.hpp>
#include "tempo/ioutil.hpp"

namespace tempo {

using nlohmann::json;

RoadClass road_class_from_string(std::string_view s) {
  if (s == "highway") return RoadClass::highway;
  if (s == "local") return RoadClass::local;
  throw std::runtime_error("unknown road_class: '" + std::string(s) +
                           "' (expected \"highway\" or \"local\")");
}

std::string_view to_string(RoadClass c) {
  return c == RoadClass::highway ? "highway" : "local";
}

namespace {
constexpr double kEarthRadiusKm = 6371.0088;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}  // namespace

double great_circle_km(const LonLat& a, const LonLat& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlam = (b.lon - a.lon) * kDegToRad;
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlam / 2) * std::sin(dlam / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double polyline_length_km(const std::vector<LonLat>& pts) {
  double total = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) total += great_circle_km(pts[i - 1], pts[i]);
  return total;
}

Network::Network(std::vector<Link> links, std::map<std::string, std::optional<LonLat>> nodes,
                 std::set<std::string> impassable_nodes)
    : links_(std::move(links)),
      nodes_(std::move(nodes)),
      impassable_nodes_(std::move(impassable_nodes)) {
  std::sort(links_.begin(), links_.end(),
            [](const Link& a, const Link& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& l = links_[i];
    if (l.id.empty()) throw std::runtime_error("link with empty id");
    if (!link_index_.emplace(l.id, i).second)
      throw std::runtime_error("duplicate link id: " + l.id);
    if (!nodes_.count(l.from_node))
      throw std::runtime_error("link " + l.id + ": dangling endpoint '" + l.from_node + "'");
    if (!nodes_.count(l.to_node))
      throw std::runtime_error("link " + l.id + ": dangling endpoint '" + l.to_node + "'");
    if (!(l.length_km > 0))
      throw std::runtime_error("link " + l.id + ": length_km must be > 0");
    if (l.lanes < 1) throw std::runtime_error("link " + l.id + ": lanes must be >= 1");
    if (!(l.lane_width_m > 0))
      throw std::runtime_error("link " + l.id + ": lane_width_m must be > 0");
    if (!(l.free_flow_kmh > 5.0))
      throw std::runtime_error("link " + l.id + ": free_flow_kmh must be > 5 km/h");
    if (!(l.capacity_vph > 0))
      throw std::runtime_error("link " + l.id + ": capacity_vph must be > 0");
    out_[l.from_node].push_back(i);
  }
  for (const auto& n : impassable_nodes_)
    if (!nodes_.count(n)) throw std::runtime_error("impassable node not in network: " + n);
}

bool Network::has_link(const std::string& id) const { return link_index_.count(id) > 0; }
bool Network::has_node(const std::string& id) const { return nodes_.count(id) > 0; }
bool Network::node_impassable(const std::string& id) const {
  return impassable_nodes_.count(id) > 0;
}

const Link& Network::link(const std::string& id) const {
  return links_[link_index(id)];
}

std::size_t Network::link_index(const std::string& id) const {
  auto it = link_index_.find(id);
  if (it == link_index_.end()) throw std::runtime_error("unknown link id: " + id);
  return it->second;
}

const std::vector<std::size_t>& Network::out_links(const std::string& node) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = out_.find(node);
  return it == out_.end() ? kEmpty : it->second;
}

double ODMatrix::demand(const std::string& o, const std::string& d) const {
  auto it = entries.find({o, d});
  return it == entries.end() ? 0.0 : it->second;
}

double ODMatrix::total() const {
  double t = 0.0;
  for (const auto& [od, v] : entries) t += v;
  return t;
}

namespace {

std::string feature_name(const json& f, std::size_t index) {
  if (f.contains("properties") && f["properties"].contains("id"))
    return "feature '" + f["properties"]["id"].get<std::string>() + "'";
  return "feature #" + std::to_string(index);
}

double require_number(const json& props, const char* key, const std::string& who) {
  if (!props.contains(key))
    throw std::runtime_error(who + ": missing property '" + key + "'");
  if (!props[key].is_number())
    throw std::runtime_error(who + ": property '" + key + "' must be a number");
  return props[key].get<double>();
}

std::string require_string(const json& props, const char* key, const std::string& who) {
  if (!props.contains(key) || !props[key].is_string())
    throw std::runtime_error(who + ": missing property '" + key + "'");
  return props[key].get<std::string>();
}

std::vector<LonLat> parse_coords(const json& geom, const std::string& who) {
  std::vector<LonLat> pts;
  for (const auto& c : geom.at("coordinates")) {
    if (!c.is_array() || c.size() < 2)
      throw std::runtime_error(who + ": malformed coordinate");
    pts.push_back({c[0].get<double>(), c[1].get<double>()});
  }
  if (pts.size() < 2) throw std::runtime_error(who + ": LineString needs >= 2 points");
  return pts;
}

}  // namespace

Network load_network(const std::string& path, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("GeoJSON parse failure in " + path + ": " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features"))
    throw std::runtime_error(path + ": expected a GeoJSON FeatureCollection");

  std::vector<Link> links;
  std::map<std::string, std::optional<LonLat>> nodes;

  const auto& features = doc["features"];
  // First pass: explicit Point nodes, so link endpoints can refer to them.
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    const std::string who = feature_name(f, i);
    if (!f.contains("geometry")) continue;
    if (f["geometry"].value("type", "") != "Point") continue;
    const json& props = f.value("properties", json::object());
    std::string id = require_string(props, "id", who);
    const auto& c = f["geometry"].at("coordinates");
    nodes[id] = LonLat{c[0].get<double>(), c[1].get<double>()};
  }

  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    const std::string who = feature_name(f, i);
    if (!f.contains("geometry") || f["geometry"].value("type", "") != "LineString") continue;
    const json& props = f.value("properties", json::object());

    Link l;
    l.id = require_string(props, "id", who);
    l.from_node = require_string(props, "from_node", who);
    l.to_node = require_string(props, "to_node", who);
    const double lanes = require_number(props, "lanes", who);
    if (lanes != std::floor(lanes))
      throw std::runtime_error(who + ": lanes must be an integer");
    l.lanes = static_cast<int>(lanes);
    l.free_flow_kmh = require_number(props, "free_flow_kmh", who);
    l.capacity_vph = require_number(props, "capacity_vph", who);
    l.road_class = road_class_from_string(require_string(props, "road_class", who));
    if (props.contains("lane_width_m")) l.lane_width_m = props["lane_width_m"].get<double>();
    if (props.contains("closed")) l.closed = props["closed"].get<bool>();
    l.geometry = parse_coords(f["geometry"], who);

    const double computed = polyline_length_km(l.geometry);
    if (props.contains("length_km")) {
      l.length_km = props["length_km"].get<double>();
      // Declared value wins; flag a gross disagreement but never auto-correct.
      if (l.length_km > 0 && computed > 0 &&
          std::abs(l.length_km - computed) / l.length_km > 0.10 && warnings) {
        warnings->push_back("link " + l.id + ": declared length_km " + num_str(l.length_km) +
                            " differs from geometry length " + num_str(computed) +
                            " by more than 10%");
      }
    } else {
      l.length_km = computed;
    }

    if (!nodes.count(l.from_node)) nodes[l.from_node] = l.geometry.front();
    if (!nodes.count(l.to_node)) nodes[l.to_node] = l.geometry.back();
    links.push_back(std::move(l));
  }

  return Network(std::move(links), std::move(nodes));
}

void save_network(const Network& net, const std::string& path) {
  json features = json::array();
  for (const auto& [id, coord] : net.nodes()) {
    if (!coord) continue;
    json f;
    f["type"] = "Feature";
    f["properties"] = {{"id", id}};
    f["geometry"] = {{"type", "Point"}, {"coordinates", {coord->lon, coord->lat}}};
    features.push_back(std::move(f));
  }
  for (const Link& l : net.links()) {
    json coords = json::array();
    if (!l.geometry.empty()) {
      for (const auto& p : l.geometry) coords.push_back({p.lon, p.lat});
    } else {
      const auto& from = net.nodes().at(l.from_node);
      const auto& to = net.nodes().at(l.to_node);
      if (!from || !to)
        throw std::runtime_error("cannot serialize link " + l.id +
                                 ": no geometry and endpoint coordinates unknown");
      coords.push_back({from->lon, from->lat});
      coords.push_back({to->lon, to->lat});
    }
    json f;
    f["type"] = "Feature";
    f["properties"] = {{"id", l.id},
                       {"from_node", l.from_node},
                       {"to_node", l.to_node},
                       {"length_km", l.length_km},
                       {"lanes", l.lanes},
                       {"lane_width_m", l.lane_width_m},
                       {"free_flow_kmh", l.free_flow_kmh},
                       {"capacity_vph", l.capacity_vph},
                       {"road_class", std::string(to_string(l.road_class))},
                       {"closed", l.closed}};
    f["geometry"] = {{"type", "LineString"}, {"coordinates", std::move(coords)}};
    features.push_back(std::move(f));
  }
  json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = std::move(features);
  write_text_file(path, doc.dump(2) + "\n");
}

Network apply_closure(const Network& net, const ClosureScenario& c) {
  if (c.closed_link_ids.empty())
    throw std::runtime_error("closure scenario lists no links");
  if (!(c.duration_hr > 0)) throw std::runtime_error("closure duration must be > 0");
  for (const auto& id : c.closed_link_ids)
    if (!net.has_link(id)) throw std::runtime_error("closure names unknown link: " + id);
  for (const auto& n : c.barrier_node_ids)
    if (!net.has_node(n)) throw std::runtime_error("closure names unknown barrier node: " + n);

  std::vector<Link> links = net.links();
  std::set<std::string> to_close(c.closed_link_ids.begin(), c.closed_link_ids.end());
  for (Link& l : links)
    if (to_close.count(l.id)) l.closed = true;
  std::set<std::string> barriers = net.impassable_nodes();
  barriers.insert(c.barrier_node_ids.begin(), c.barrier_node_ids.end());
  return Network(std::move(links), net.nodes(), std::move(barriers));
}

ODMatrix load_od(const std::string& path, const Network& net) {
  const std::string text = read_text_file(path);
  std::vector<std::string> lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]).empty())
    throw std::runtime_error(path + ": empty OD file");

  std::vector<std::string> header = split(lines[0], ',');
  for (auto& h : header) h = to_lower(trim(h));
  const bool has_label = header.size() == 4 && header[3] == "time_label";
  if (!(header.size() == 3 || has_label) || header[0] != "origin" ||
      header[1] != "destination" || header[2] != "demand")
    throw std::runtime_error(path + ": expected header origin,destination,demand[,time_label]");

  ODMatrix od;
  bool label_seen = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string line = trim(lines[i]);
    if (line.empty()) continue;
    const std::string where = path + " line " + std::to_string(i + 1);
    std::vector<std::string> cols = split(line, ',');
    if (cols.size() != header.size())
      throw std::runtime_error(where + ": expected " + std::to_string(header.size()) +
                               " columns, got " + std::to_string(cols.size()));
    const std::string origin = trim(cols[0]);
    const std::string dest = trim(cols[1]);
    double demand = 0.0;
    try {
      demand = std::stod(trim(cols[2]));
    } catch (const std::exception&) {
      throw std::runtime_error(where + ": demand is not a number: '" + cols[2] + "'");
    }
    if (demand < 0) throw std::runtime_error(where + ": negative demand");
    if (!net.has_node(origin))
      throw std::runtime_error(where + ": unknown origin node '" + origin + "'");
    if (!net.has_node(dest))
      throw std::runtime_error(where + ": unknown destination node '" + dest + "'");
    od.entries[{origin, dest}] += demand;
    if (has_label) {
      const std::string label = trim(cols[3]);
      if (!label.empty()) {
        if (label_seen && od.time_label != label)
          throw std::runtime_error(where + ": inconsistent time_label '" + label + "'");
        od.time_label = label;
        label_seen = true;
      }
    }
  }
  return od;
}

void validate_connectivity(const Network& net, const ODMatrix& od) {
  // BFS over open links, cached per origin.
  std::map<std::string, std::set<std::string>> reachable;
  for (const auto& [pair, demand] : od.entries) {
    const auto& [origin, dest] = pair;
    auto it = reachable.find(origin);
    if (it == reachable.end()) {
      std::set<std::string> seen;
      std::deque<std::string> frontier;
      if (!net.node_impassable(origin)) {
        seen.insert(origin);
        frontier.push_back(origin);
      }
      while (!frontier.empty()) {
        std::string node = frontier.front();
        frontier.pop_front();
        for (std::size_t idx : net.out_links(node)) {
          const Link& l = net.link_at(idx);
          if (l.closed || net.node_impassable(l.to_node)) continue;
          if (seen.insert(l.to_node).second) frontier.push_back(l.to_node);
        }
      }
      it = reachable.emplace(origin, std::move(seen)).first;
    }
    if (!it->second.count(dest))
      throw std::runtime_error("no open path for OD pair (" + origin + ", " + dest + ")");
  }
}

}  // namespace tempo
