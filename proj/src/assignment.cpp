// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/assignment.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "tempo/ioutil.hpp"

namespace tempo {

LinkFlows LinkFlows::zeros(const Network& net) {
  LinkFlows f;
  for (const Link& l : net.links()) f.flows_[l.id] = 0.0;
  return f;
}

double LinkFlows::get(const std::string& link_id) const {
  auto it = flows_.find(link_id);
  return it == flows_.end() ? 0.0 : it->second;
}

void LinkFlows::add(const std::string& link_id, double flow_vph) {
  flows_[link_id] += flow_vph;
}

void LinkFlows::set(const std::string& link_id, double flow_vph) {
  flows_[link_id] = flow_vph;
}

bool LinkFlows::same_links(const LinkFlows& other) const {
  if (flows_.size() != other.flows_.size()) return false;
  auto a = flows_.begin();
  auto b = other.flows_.begin();
  for (; a != flows_.end(); ++a, ++b)
    if (a->first != b->first) return false;
  return true;
}

std::string_view to_string(ItineraryKind k) {
  switch (k) {
    case ItineraryKind::macro_left: return "macro_left";
    case ItineraryKind::macro_right: return "macro_right";
    case ItineraryKind::micro: return "micro";
    case ItineraryKind::hybrid: return "hybrid";
    case ItineraryKind::main: return "main";
  }
  return "main";
}

ItineraryKind itinerary_kind_from_string(std::string_view s) {
  if (s == "macro_left") return ItineraryKind::macro_left;
  if (s == "macro_right") return ItineraryKind::macro_right;
  if (s == "micro") return ItineraryKind::micro;
  if (s == "hybrid") return ItineraryKind::hybrid;
  if (s == "main") return ItineraryKind::main;
  throw std::runtime_error("unknown itinerary kind: '" + std::string(s) + "'");
}

Itinerary make_itinerary(const Network& net, ItineraryKind kind,
                         std::vector<std::string> link_ids) {
  Itinerary it;
  it.kind = kind;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < link_ids.size(); ++i) {
    const Link& l = net.link(link_ids[i]);
    if (!seen.insert(l.id).second)
      throw std::runtime_error("itinerary repeats link " + l.id);
    if (i > 0) {
      const Link& prev = net.link(link_ids[i - 1]);
      if (prev.to_node != l.from_node)
        throw std::runtime_error("itinerary links " + prev.id + " and " + l.id +
                                 " do not share a node");
    }
    if (kind == ItineraryKind::micro && l.road_class != RoadClass::local)
      throw std::runtime_error("micro itinerary contains non-local link " + l.id);
    if ((kind == ItineraryKind::macro_left || kind == ItineraryKind::macro_right) &&
        l.road_class != RoadClass::highway)
      throw std::runtime_error("macro itinerary contains non-highway link " + l.id);
    it.length_km += l.length_km;
  }
  it.link_ids = std::move(link_ids);
  return it;
}

namespace {

bool link_usable(const Network& net, const Link& l, const ClassFilter& filter) {
  if (l.closed) return false;
  if (filter && !filter->count(l.road_class)) return false;
  if (net.node_impassable(l.from_node) || net.node_impassable(l.to_node)) return false;
  return true;
}

double link_cost_hr(const Link& l) { return l.length_km / l.free_flow_kmh; }

struct SearchLabel {
  double cost = 0.0;
  std::vector<std::string> seq;
  std::string node;
};

// Min-heap order: smaller cost first, then lexicographically smaller link-id
// sequence. Positive link costs make this a valid Dijkstra key: the first
// label popped for a node is its final one.
struct LabelGreater {
  bool operator()(const SearchLabel& a, const SearchLabel& b) const {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.seq > b.seq;
  }
};

}  // namespace

Itinerary shortest_path(const Network& net, const std::string& origin,
                        const std::string& destination, const ClassFilter& filter,
                        ItineraryKind kind) {
  if (origin == destination)
    throw std::runtime_error("shortest_path: origin equals destination ('" + origin + "')");
  if (!net.has_node(origin)) throw std::runtime_error("unknown origin node: " + origin);
  if (!net.has_node(destination))
    throw std::runtime_error("unknown destination node: " + destination);

  std::priority_queue<SearchLabel, std::vector<SearchLabel>, LabelGreater> heap;
  std::set<std::string> settled;
  if (!net.node_impassable(origin)) heap.push({0.0, {}, origin});

  while (!heap.empty()) {
    SearchLabel cur = heap.top();
    heap.pop();
    if (!settled.insert(cur.node).second) continue;
    if (cur.node == destination) return make_itinerary(net, kind, std::move(cur.seq));
    for (std::size_t idx : net.out_links(cur.node)) {
      const Link& l = net.link_at(idx);
      if (!link_usable(net, l, filter) || settled.count(l.to_node)) continue;
      SearchLabel next;
      next.cost = cur.cost + link_cost_hr(l);
      next.seq = cur.seq;
      next.seq.push_back(l.id);
      next.node = l.to_node;
      heap.push(std::move(next));
    }
  }
  std::string flt = !filter ? "none" : [&] {
    std::string s;
    for (RoadClass c : *filter) s += (s.empty() ? "" : "+") + std::string(to_string(c));
    return s;
  }();
  throw std::runtime_error("no path from " + origin + " to " + destination +
                           " (class filter: " + flt + ")");
}

LinkFlows aon_assign(const Network& net, const ODMatrix& od, const ClassFilter& filter) {
  LinkFlows flows = LinkFlows::zeros(net);
  // entries iterate in sorted pair order, which fixes the merge order.
  for (const auto& [pair, demand] : od.entries) {
    if (demand == 0.0) continue;
    Itinerary path;
    try {
      path = shortest_path(net, pair.first, pair.second, filter);
    } catch (const std::exception& e) {
      throw std::runtime_error("aon_assign: OD pair (" + pair.first + ", " + pair.second +
                               ") is unroutable: " + e.what());
    }
    for (const auto& id : path.link_ids) flows.add(id, demand);
  }
  return flows;
}

DisruptionDiff disruption_diff(const LinkFlows& base, const LinkFlows& closed) {
  if (!base.same_links(closed))
    throw std::runtime_error("disruption_diff: flow maps cover different link sets");
  DisruptionDiff diff;
  for (const auto& [id, base_flow] : base.entries()) {
    const double closed_flow = closed.get(id);
    diff.disrupted.set(id, std::max(base_flow - closed_flow, 0.0));
    diff.diverted.set(id, std::max(closed_flow - base_flow, 0.0));
  }
  return diff;
}

Itinerary extract_itinerary(const Network& net, const ClosureScenario& closure,
                            const std::string& start, const std::string& end,
                            ItineraryKind kind) {
  ClassFilter filter;
  switch (kind) {
    case ItineraryKind::micro:
      filter = std::set<RoadClass>{RoadClass::local};
      break;
    case ItineraryKind::macro_left:
    case ItineraryKind::macro_right:
      filter = std::set<RoadClass>{RoadClass::highway};
      break;
    case ItineraryKind::hybrid:
    case ItineraryKind::main:
      filter = std::nullopt;
      break;
  }
  Network closed = apply_closure(net, closure);
  return shortest_path(closed, start, end, filter, kind);
}

void write_link_flows_csv(const LinkFlows& flows, const std::string& path) {
  std::ostringstream out;
  out << "link_id,flow_vph\n";
  for (const auto& [id, flow] : flows.entries()) out << id << ',' << num_str(flow) << '\n';
  write_text_file(path, out.str());
}

void write_itinerary_csv(const Network& net, const Itinerary& itin, const std::string& path) {
  std::ostringstream out;
  out << "seq,link_id,length_km\n";
  for (std::size_t i = 0; i < itin.link_ids.size(); ++i)
    out << (i + 1) << ',' << itin.link_ids[i] << ','
        << num_str(net.link(itin.link_ids[i]).length_km) << '\n';
  write_text_file(path, out.str());
}

}  // namespace tempo
