// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tempo/assignment.hpp"
#include "tempo/flowtime.hpp"
#include "tempo/ioutil.hpp"

namespace tempo {

namespace {

double json_number(const nlohmann::json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw std::runtime_error("config: field '" + key + "' must be a number");
  return j[key].get<double>();
}

bool json_flag(const nlohmann::json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean())
    throw std::runtime_error("config: field '" + key + "' must be a boolean");
  return j[key].get<bool>();
}

std::string json_string(const nlohmann::json& j, const std::string& key,
                        const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string())
    throw std::runtime_error("config: field '" + key + "' must be a string");
  return j[key].get<std::string>();
}

std::vector<double> json_numbers(const nlohmann::json& j, const std::string& key,
                                 std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_array())
    throw std::runtime_error("config: field '" + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number())
      throw std::runtime_error("config: field '" + key + "' must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::string> json_strings(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_array())
    throw std::runtime_error("config: field '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j[key]) {
    if (!v.is_string())
      throw std::runtime_error("config: field '" + key + "' must contain only strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

/// Paths inside a config resolve against the config file's directory.
std::string resolve_path(const ScenarioConfig& config, const std::string& path) {
  if (path.empty() || path.front() == '/' || config.base_dir.empty()) return path;
  return config.base_dir + "/" + path;
}

std::string ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["outputs"] = outputs;
  write_text_file(out_dir + "/manifest.json", j.dump(2) + "\n");
}

Network load_network_checked(const ScenarioConfig& config) {
  if (config.network_path.empty())
    throw std::runtime_error("config: no network file configured");
  return load_network(resolve_path(config, config.network_path));
}

ODMatrix load_od_checked(const ScenarioConfig& config, const Network& net) {
  if (config.od_path.empty()) throw std::runtime_error("config: no OD file configured");
  return load_od(resolve_path(config, config.od_path), net);
}

ClosureScenario closure_scenario(const ClosureConfig& c) {
  ClosureScenario sc;
  sc.closed_link_ids = c.links;
  sc.start_clock = c.start_clock;
  sc.duration_hr = c.duration_hr;
  sc.barrier_node_ids = c.barriers;
  return sc;
}

ArrivalCurve arrivals_from_config(const ScenarioConfig& config) {
  if (config.arrival_flows_vph.empty())
    throw std::runtime_error("config: no arrival flows configured (arrival_flows_vph)");
  const double start = config.closure ? std::fmod(config.closure->start_clock, 24.0) : 12.0;
  return build_arrivals(config.arrival_flows_vph, start, config.arrival_horizon_hr);
}

/// Unit-width duration brackets covering the configured durations, the shape
/// of the published per-hour ladder.
std::vector<DurationBracket> unit_brackets(const std::vector<double>& durations_hr) {
  double max_d = 0.0;
  for (double d : durations_hr) max_d = std::max(max_d, d);
  std::vector<DurationBracket> brackets;
  for (double lo = 0.0; lo < max_d - 1e-9 || brackets.empty(); lo += 1.0)
    brackets.push_back({lo, lo + 1.0});
  return brackets;
}

/// Rate-dependent activation inputs: an explicit fixture file wins, then live
/// derivation from the network, then the embedded study constants (which are
/// specifically the 60% response values).
std::function<ActivationInputs(double)> make_inputs_source(const ScenarioConfig& config) {
  if (!config.activation_fixture_path.empty()) {
    auto fixtures =
        load_activation_fixtures(resolve_path(config, config.activation_fixture_path));
    return [fixtures](double rate) {
      auto it = fixtures.lower_bound(rate - 1e-9);
      if (it == fixtures.end() || std::abs(it->first - rate) > 1e-9)
        throw std::runtime_error("activation fixtures define no entry for response rate " +
                                 num_str(rate));
      return it->second;
    };
  }
  if (config.closure && !config.network_path.empty()) {
    const Network net = load_network_checked(config);
    const ODMatrix od = load_od_checked(config, net);
    const LinkFlows base = aon_assign(net, od);
    const ClosureScenario closure = closure_scenario(*config.closure);
    double interrupted = config.closure->interrupted_flow_vph;
    if (interrupted <= 0.0) {
      if (closure.closed_link_ids.empty())
        throw std::runtime_error("config: closure lists no links");
      interrupted = base.get(closure.closed_link_ids.front());
    }
    CorridorSpec spec;
    spec.diversion_node = config.closure->diversion_node;
    spec.reentry_left = config.closure->reentry_left;
    spec.reentry_right = config.closure->reentry_right;
    spec.micro_end = config.closure->micro_end;
    spec.interrupted_flow_vph = interrupted;
    spec.left_weight = config.closure->left_weight;
    spec.right_weight = config.closure->right_weight;
    spec.brackets = unit_brackets(config.durations_hr);
    spec.statistic = config.statistic;
    spec.rep_fraction = config.rep_fraction;
    const ArrivalCurve arrivals = arrivals_from_config(config);
    const QueueParams qp = config.queue;
    const SpeedFlowParams sp = config.speed;
    return [net, closure, base, spec, arrivals, qp, sp](double rate) {
      return derive_inputs(net, closure, base, spec, arrivals, qp, rate, sp);
    };
  }
  return [](double rate) {
    if (std::abs(rate - 0.6) > 1e-9)
      throw std::runtime_error(
          "the embedded activation constants hold for a 0.6 response rate only; supply an "
          "activation fixture file or a network with a closure for rate " +
          num_str(rate));
    return paper_inputs();
  };
}

}  // namespace

ScenarioConfig paper_a1_flood_profile() {
  ScenarioConfig c;
  c.durations_hr = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  c.response_rates = {0.6};
  c.arrival_flows_vph = {3750.84, 3694.65, 4045.85};
  c.arrival_horizon_hr = 12.0;
  c.statistic = DelayStatistic::maximum;
  c.rep_fraction = 0.5;
  c.hourly_profile = HourlyProfile::default_noon_profile();
  return c;  // queue, calendar and speed defaults are the published constants
}

ScenarioConfig load_config(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw std::runtime_error("config " + path + ": not a JSON object");

  ScenarioConfig c;
  c.hourly_profile = HourlyProfile::default_noon_profile();
  const std::string profile = json_string(doc, "profile", "");
  if (!profile.empty()) {
    if (profile != "paper-a1-flood")
      throw std::runtime_error("config " + path + ": unknown profile '" + profile + "'");
    c = paper_a1_flood_profile();
  }
  c.base_dir = std::filesystem::path(path).parent_path().string();

  c.network_path = json_string(doc, "network", c.network_path);
  c.od_path = json_string(doc, "od", c.od_path);
  c.evacuation_path = json_string(doc, "evacuation", c.evacuation_path);
  c.activation_fixture_path = json_string(doc, "activation_fixture", c.activation_fixture_path);
  c.output_dir = json_string(doc, "output_dir", c.output_dir);
  c.durations_hr = json_numbers(doc, "durations_hr", c.durations_hr);
  c.response_rates = json_numbers(doc, "response_rates", c.response_rates);
  c.arrival_flows_vph = json_numbers(doc, "arrival_flows_vph", c.arrival_flows_vph);
  c.arrival_horizon_hr = json_number(doc, "arrival_horizon_hr", c.arrival_horizon_hr);
  c.rep_fraction = json_number(doc, "rep_fraction", c.rep_fraction);
  c.statistic = delay_statistic_from_string(
      json_string(doc, "statistic", std::string(to_string(c.statistic))));

  if (doc.contains("closure")) {
    const auto& j = doc["closure"];
    if (!j.is_object()) throw std::runtime_error("config " + path + ": closure must be an object");
    ClosureConfig cc;
    cc.links = json_strings(j, "links");
    if (cc.links.empty())
      throw std::runtime_error("config " + path + ": closure needs a non-empty links array");
    cc.start_clock = json_number(j, "start_clock", cc.start_clock);
    cc.duration_hr = json_number(j, "duration_hr", cc.duration_hr);
    cc.barriers = json_strings(j, "barriers");
    cc.diversion_node = json_string(j, "diversion_node", "");
    cc.reentry_left = json_string(j, "reentry_left", "");
    cc.reentry_right = json_string(j, "reentry_right", "");
    cc.micro_end = json_string(j, "micro_end", "");
    cc.interrupted_flow_vph = json_number(j, "interrupted_flow_vph", 0.0);
    cc.left_weight = json_number(j, "left_weight", 0.5);
    cc.right_weight = json_number(j, "right_weight", 0.5);
    c.closure = std::move(cc);
  }

  if (doc.contains("queue")) {
    const auto& j = doc["queue"];
    if (!j.is_object()) throw std::runtime_error("config " + path + ": queue must be an object");
    c.queue.q_max_vph = json_number(j, "q_max_vph", c.queue.q_max_vph);
    c.queue.jam_density_vpkm = json_number(j, "jam_density_vpkm", c.queue.jam_density_vpkm);
    c.queue.free_flow_kmh = json_number(j, "free_flow_kmh", c.queue.free_flow_kmh);
    c.queue.critical_density_vpkm =
        json_number(j, "critical_density_vpkm", c.queue.critical_density_vpkm);
    c.queue.mu1_vph = json_number(j, "mu1_vph", c.queue.mu1_vph);
    c.queue.mu2_vph = json_number(j, "mu2_vph", c.queue.mu2_vph);
    c.queue.bottleneck_speed_kmh =
        json_number(j, "bottleneck_speed_kmh", c.queue.bottleneck_speed_kmh);
    c.queue.bottleneck_length_km =
        json_number(j, "bottleneck_length_km", c.queue.bottleneck_length_km);
    c.queue.t_f_hr = json_number(j, "t_f_hr", c.queue.t_f_hr);
    c.queue.jam_density_per_lane =
        json_flag(j, "jam_density_per_lane", c.queue.jam_density_per_lane);
    c.queue.include_bottleneck_traversal =
        json_flag(j, "include_bottleneck_traversal", c.queue.include_bottleneck_traversal);
  }
  validate(c.queue);

  if (doc.contains("calendar")) {
    const auto& j = doc["calendar"];
    if (!j.is_object())
      throw std::runtime_error("config " + path + ": calendar must be an object");
    c.calendar.working_days =
        static_cast<int>(json_number(j, "working_days", c.calendar.working_days));
    c.calendar.saturdays = static_cast<int>(json_number(j, "saturdays", c.calendar.saturdays));
    c.calendar.sundays_holidays =
        static_cast<int>(json_number(j, "sundays_holidays", c.calendar.sundays_holidays));
    c.calendar.saturday_factor = json_number(j, "saturday_factor", c.calendar.saturday_factor);
    c.calendar.sunday_factor = json_number(j, "sunday_factor", c.calendar.sunday_factor);
  }

  if (doc.contains("hourly_profile")) {
    const auto& j = doc["hourly_profile"];
    if (!j.is_object())
      throw std::runtime_error("config " + path +
                               ": hourly_profile must map hour strings to fractions");
    c.hourly_profile = HourlyProfile();
    for (const auto& [key, value] : j.items()) {
      int hour = 0;
      try {
        std::size_t used = 0;
        hour = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw std::runtime_error("config " + path + ": hourly_profile key '" + key +
                                 "' is not an hour");
      }
      if (!value.is_number())
        throw std::runtime_error("config " + path + ": hourly_profile fractions must be numbers");
      c.hourly_profile.set(hour, value.get<double>());
    }
  }

  if (doc.contains("speed")) {
    const auto& j = doc["speed"];
    if (!j.is_object()) throw std::runtime_error("config " + path + ": speed must be an object");
    c.speed.alpha = json_number(j, "alpha", c.speed.alpha);
    c.speed.lane_width_m = json_number(j, "lane_width_m", c.speed.lane_width_m);
    c.speed.floor_speed_kmh = json_number(j, "floor_speed_kmh", c.speed.floor_speed_kmh);
  }

  for (double d : c.durations_hr)
    if (d < 0.0) throw std::runtime_error("config " + path + ": durations must be non-negative");
  for (double r : c.response_rates)
    if (r < 0.0 || r > 1.0)
      throw std::runtime_error("config " + path + ": response rates must lie in [0, 1]");
  for (double f : c.arrival_flows_vph)
    if (f < 0.0)
      throw std::runtime_error("config " + path + ": arrival flows must be non-negative");
  if (c.arrival_horizon_hr <= 0.0)
    throw std::runtime_error("config " + path + ": arrival horizon must be positive");
  if (c.rep_fraction < 0.0 || c.rep_fraction > 1.0)
    throw std::runtime_error("config " + path + ": rep_fraction must lie in [0, 1]");
  return c;
}

std::string resolve_output_dir(const ScenarioConfig& config, const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  if (!config.output_dir.empty()) return resolve_path(config, config.output_dir);
  if (const char* env = std::getenv("TEMPO_OUT_DIR"); env && *env) return env;
  return "out";
}

void cmd_assign(const ScenarioConfig& config, const std::string& out_dir) {
  if (!config.closure) throw std::runtime_error("assign needs a closure in the config");
  const Network net = load_network_checked(config);
  const ODMatrix od = load_od_checked(config, net);
  const ClosureScenario closure = closure_scenario(*config.closure);
  const Network closed_net = apply_closure(net, closure);

  const LinkFlows base = aon_assign(net, od);
  const LinkFlows closed = aon_assign(closed_net, od);
  const DisruptionDiff diff = disruption_diff(base, closed);

  ensure_dir(out_dir);
  std::vector<std::string> outputs;
  auto emit = [&](const LinkFlows& flows, const std::string& name) {
    write_link_flows_csv(flows, out_dir + "/" + name);
    outputs.push_back(name);
  };
  emit(base, "flows_base.csv");
  emit(closed, "flows_closed.csv");
  emit(diff.disrupted, "flows_disrupted.csv");
  emit(diff.diverted, "flows_diverted.csv");

  const ClosureConfig& cc = *config.closure;
  if (!cc.diversion_node.empty()) {
    auto emit_itinerary = [&](const std::string& end, ItineraryKind kind,
                              const std::string& name) {
      if (end.empty()) return;
      const Itinerary it = extract_itinerary(net, closure, cc.diversion_node, end, kind);
      write_itinerary_csv(net, it, out_dir + "/" + name);
      outputs.push_back(name);
    };
    emit_itinerary(cc.reentry_left, ItineraryKind::macro_left, "itinerary_macro_left.csv");
    emit_itinerary(cc.reentry_right, ItineraryKind::macro_right, "itinerary_macro_right.csv");
    emit_itinerary(cc.micro_end, ItineraryKind::micro, "itinerary_micro.csv");
  }
  write_manifest(out_dir, "assign", outputs);
}

void cmd_activate(const ScenarioConfig& config, const std::string& out_dir) {
  if (config.response_rates.empty())
    throw std::runtime_error("activate needs at least one response rate");
  const auto inputs_for_rate = make_inputs_source(config);
  ensure_dir(out_dir);
  std::vector<std::string> outputs;
  for (double rate : config.response_rates) {
    const ActivationPlan plan = activation_plan(config.durations_hr, rate, inputs_for_rate(rate));
    const std::string plan_name = "activation_plan_r" + num_str(rate) + ".csv";
    const std::string strategy_name = "activation_strategy_r" + num_str(rate) + ".json";
    write_plan_csv(plan, out_dir + "/" + plan_name);
    write_text_file(out_dir + "/" + strategy_name, strategy_json(plan));
    outputs.push_back(plan_name);
    outputs.push_back(strategy_name);
  }
  write_manifest(out_dir, "activate", outputs);
}

void cmd_delay(const ScenarioConfig& config, const std::string& out_dir) {
  if (config.durations_hr.empty()) throw std::runtime_error("delay needs a durations list");
  const ArrivalCurve arrivals = arrivals_from_config(config);
  ensure_dir(out_dir);

  nlohmann::json j;
  j["start_clock"] = arrivals.start_clock();
  j["statistic"] = std::string(to_string(config.statistic));
  nlohmann::json rows = nlohmann::json::array();
  for (double d : config.durations_hr) {
    const DelayResult res = io_delay(arrivals, d, config.queue);
    const IoDiagram dia = io_diagram(arrivals, d, config.queue);
    rows.push_back({{"duration_hr", d},
                    {"total_delay_veh_hr", res.total_delay_veh_hr},
                    {"avg_delay_min", res.avg_delay_min},
                    {"max_delay_min", res.max_delay_min},
                    {"statistic_min", delay_statistic_min(res, dia, config.statistic)},
                    {"clearance_clock", res.clearance_clock},
                    {"clearance_offset_hr", res.clearance_offset_hr},
                    {"max_queue_veh", res.max_queue_veh},
                    {"max_queue_km", res.max_queue_km},
                    {"delayed_vehicles", res.delayed_vehicles},
                    {"bottleneck_traversal_min", res.bottleneck_traversal_min}});
  }
  j["durations"] = rows;
  write_text_file(out_dir + "/delay.json", j.dump(2) + "\n");

  std::ostringstream table;
  table << "from_clock,to_clock,flow_vph,headway_min,cumulative_veh\n";
  for (const HourlyRow& row : hourly_table(arrivals))
    table << num_str(row.from_clock) << ',' << num_str(row.to_clock) << ','
          << num_str(row.flow_vph) << ',' << fixed_str(row.headway_min, 4) << ','
          << row.cumulative_veh << '\n';
  write_text_file(out_dir + "/arrivals_hourly.csv", table.str());
  write_manifest(out_dir, "delay", {"delay.json", "arrivals_hourly.csv"});
}

void cmd_curves(const ScenarioConfig& config, const std::string& out_dir) {
  if (config.durations_hr.empty()) throw std::runtime_error("curves needs a durations list");
  const ArrivalCurve arrivals = arrivals_from_config(config);
  ensure_dir(out_dir);
  std::vector<std::string> outputs;
  for (double d : config.durations_hr) {
    const IoDiagram dia = io_diagram(arrivals, d, config.queue);
    const std::string name = "curves_d" + num_str(d) + ".csv";
    write_curve_csv(dia, out_dir + "/" + name);
    outputs.push_back(name);
  }
  write_manifest(out_dir, "curves", outputs);
}

void cmd_evacuate(const ScenarioConfig& config, const std::string& out_dir) {
  if (config.evacuation_path.empty())
    throw std::runtime_error("evacuate needs an evacuation scenario file");
  const Network net = load_network_checked(config);
  const EvacScenario scenario =
      load_evac_scenario(resolve_path(config, config.evacuation_path), net);

  std::vector<std::string> strategies;
  if (scenario.strategy.empty())
    strategies = {"nearest", "balanced", "override"};
  else
    strategies = {scenario.strategy};

  EvacParams params;
  params.speed = config.speed;

  ensure_dir(out_dir);
  std::vector<std::string> outputs;
  nlohmann::json summary;
  nlohmann::json exits = nlohmann::json::array();
  for (const ExitPoint& e : scenario.exits) exits.push_back({{"id", e.id}, {"node", e.node}});
  summary["exits"] = exits;
  nlohmann::json runs = nlohmann::json::array();

  for (const std::string& strategy : strategies) {
    ExitAssignment assignment;
    if (strategy == "nearest") {
      assignment = allocate_nearest(net, scenario.zones, scenario.exits);
    } else if (strategy == "balanced") {
      assignment = allocate_balanced(net, scenario.zones, scenario.exits);
    } else {
      assignment = allocate_override(allocate_balanced(net, scenario.zones, scenario.exits),
                                     scenario.overrides, scenario.zones, scenario.exits);
    }
    for (std::size_t k = 0; k < scenario.profiles.size(); ++k) {
      const auto slices = staged_od(assignment, scenario.zones, scenario.exits,
                                    scenario.profiles[k]);
      EvacResult result = simulate_evacuation(net, slices, params);
      for (const ExitPoint& e : scenario.exits)
        result.per_exit_vehicles.try_emplace(e.node, 0);

      const std::string name = "evac_" + strategy + "_profile" + std::to_string(k + 1) + ".csv";
      write_evac_series_csv(result, out_dir + "/" + name);
      outputs.push_back(name);

      nlohmann::json per_exit;
      for (const auto& [node, count] : result.per_exit_vehicles) per_exit[node] = count;
      long fleet = 0;
      for (const auto& [node, count] : result.per_exit_vehicles) fleet += count;
      nlohmann::json fractions = nlohmann::json::array();
      for (double f : scenario.profiles[k].fractions) fractions.push_back(f);
      runs.push_back({{"strategy", strategy},
                      {"profile", k + 1},
                      {"fractions", fractions},
                      {"clearance_min", result.clearance_time_min},
                      {"fleet", fleet},
                      {"per_exit", per_exit}});
    }
  }
  summary["runs"] = runs;
  write_text_file(out_dir + "/evacuation_summary.json", summary.dump(2) + "\n");
  outputs.push_back("evacuation_summary.json");
  write_manifest(out_dir, "evacuate", outputs);
}

void cmd_sweep(const ScenarioConfig& config, const std::string& out_dir) {
  if (config.response_rates.empty())
    throw std::runtime_error("sweep needs at least one response rate");
  const auto inputs_for_rate = make_inputs_source(config);
  const auto rows = response_sweep(config.response_rates, config.durations_hr, inputs_for_rate);
  ensure_dir(out_dir);
  write_sweep_csv(rows, out_dir + "/response_sweep.csv");
  write_manifest(out_dir, "sweep", {"response_sweep.csv"});
}

}  // namespace tempo
