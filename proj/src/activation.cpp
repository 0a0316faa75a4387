// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include "tempo/activation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tempo/demand.hpp"
#include "tempo/ioutil.hpp"

namespace tempo {

std::string_view to_string(Decision d) {
  return d == Decision::activate ? "activate" : "hold";
}

double main_route_total_min(double upstream_min, double downstream_min, double delay_min) {
  if (upstream_min < 0.0 || downstream_min < 0.0 || delay_min < 0.0)
    throw std::invalid_argument("main_route_total_min: times must be non-negative");
  return upstream_min + downstream_min + delay_min;
}

Decision should_activate(double t_alternative_min, double t_main_total_min) {
  if (t_alternative_min < 0.0 || t_main_total_min < 0.0)
    throw std::invalid_argument("should_activate: times must be non-negative");
  return t_alternative_min <= t_main_total_min ? Decision::activate : Decision::hold;
}

BracketTable::BracketTable(std::vector<std::pair<double, double>> upper_to_value)
    : entries_(std::move(upper_to_value)) {
  std::sort(entries_.begin(), entries_.end());
  double prev_upper = 0.0;
  for (const auto& [upper, value] : entries_) {
    if (upper <= prev_upper)
      throw std::invalid_argument("bracket table: upper bounds must be positive and increasing");
    if (value < 0.0) throw std::invalid_argument("bracket table: values must be non-negative");
    prev_upper = upper;
  }
}

double BracketTable::value(double duration_hr) const {
  if (duration_hr <= 0.0)
    throw std::invalid_argument("bracket table: duration must be positive");
  for (const auto& [upper, value] : entries_)
    if (duration_hr <= upper + 1e-9) return value;
  throw std::runtime_error("bracket table: no entry covers a duration of " +
                           num_str(duration_hr) + " h");
}

ActivationInputs paper_inputs() {
  ActivationInputs in;
  in.upstream_min = 0.0;
  in.micro_full_min = 645.2;
  in.micro_residual_min = 111.2;
  in.macro_left_min = 191.7;
  in.macro_right_min = 138.1;
  in.down_micro_min = 11.5;
  in.down_left_min = 157.3;
  in.down_right_min = 89.8;
  in.down_macro_micro_min = 11.5;
  in.delay_full_min = BracketTable({{1.0, 26.1}, {2.0, 85.9}, {3.0, 145.9}});
  in.delay_residual_min = BracketTable({{1.0, 12.1}, {2.0, 51.3}, {3.0, 110.5}});
  return in;
}

namespace {

struct Comparison {
  ItineraryKind itinerary;
  bool post_macro;
  double t_alternative_min;
  double downstream_min;
  const BracketTable* delays;
};

// First activating duration, with the monotonicity of decisions enforced.
std::optional<double> threshold_of(const std::vector<ActivationCell>& cells, std::size_t begin,
                                   std::size_t count) {
  std::optional<double> threshold;
  for (std::size_t i = begin; i < begin + count; ++i) {
    if (cells[i].decision == Decision::activate) {
      if (!threshold) threshold = cells[i].duration_hr;
    } else if (threshold) {
      throw std::runtime_error(
          "activation decisions are not monotone in duration (hold at " +
          num_str(cells[i].duration_hr) + " h after activating at " + num_str(*threshold) +
          " h)");
    }
  }
  return threshold;
}

std::string after_phrase(double threshold_hr, double smallest_duration_hr) {
  if (threshold_hr <= smallest_duration_hr + 1e-9) return "right away";
  return "after " + num_str(threshold_hr) + " hours";
}

}  // namespace

ActivationPlan activation_plan(const std::vector<double>& durations_hr, double response_rate,
                               const ActivationInputs& inputs) {
  if (durations_hr.empty())
    throw std::invalid_argument("activation_plan: need at least one duration");
  if (!std::is_sorted(durations_hr.begin(), durations_hr.end()))
    throw std::invalid_argument("activation_plan: durations must be sorted ascending");
  if (durations_hr.front() <= 0.0)
    throw std::invalid_argument("activation_plan: durations must be positive");
  if (response_rate < 0.0 || response_rate > 1.0)
    throw std::invalid_argument("activation_plan: response rate must lie in [0, 1]");

  ActivationPlan plan;
  plan.response_rate = response_rate;
  plan.durations_hr = durations_hr;

  const Comparison comparisons[] = {
      {ItineraryKind::micro, false, inputs.micro_full_min, inputs.down_micro_min,
       &inputs.delay_full_min},
      {ItineraryKind::macro_left, false, inputs.macro_left_min, inputs.down_left_min,
       &inputs.delay_full_min},
      {ItineraryKind::macro_right, false, inputs.macro_right_min, inputs.down_right_min,
       &inputs.delay_full_min},
      {ItineraryKind::micro, true, inputs.micro_residual_min, inputs.down_macro_micro_min,
       &inputs.delay_residual_min},
  };
  for (const Comparison& cmp : comparisons) {
    for (double d : durations_hr) {
      ActivationCell cell;
      cell.duration_hr = d;
      cell.itinerary = cmp.itinerary;
      cell.post_macro = cmp.post_macro;
      cell.t_alternative_min = cmp.t_alternative_min;
      cell.t_main_total_min =
          main_route_total_min(inputs.upstream_min, cmp.downstream_min, cmp.delays->value(d));
      cell.decision = should_activate(cell.t_alternative_min, cell.t_main_total_min);
      plan.cells.push_back(cell);
    }
  }

  const std::size_t n = durations_hr.size();
  plan.micro_alone_threshold_hr = threshold_of(plan.cells, 0, n);
  plan.macro_left_threshold_hr = threshold_of(plan.cells, n, n);
  plan.macro_right_threshold_hr = threshold_of(plan.cells, 2 * n, n);
  std::optional<double> micro_post_raw = threshold_of(plan.cells, 3 * n, n);
  // The post-macro comparison only becomes real once both macros have opened,
  // so its threshold is pushed to at least the later macro threshold.
  if (micro_post_raw && plan.macro_left_threshold_hr && plan.macro_right_threshold_hr)
    plan.macro_micro_threshold_hr =
        std::max({*micro_post_raw, *plan.macro_left_threshold_hr,
                  *plan.macro_right_threshold_hr});

  const double smallest = durations_hr.front();
  const auto& left = plan.macro_left_threshold_hr;
  const auto& right = plan.macro_right_threshold_hr;
  if (left && right && std::abs(*left - *right) < 1e-9) {
    plan.strategy.push_back("Activating the left and right macro routes " +
                            after_phrase(*left, smallest));
  } else {
    plan.strategy.push_back(left ? "Activating the left macro route " +
                                       after_phrase(*left, smallest)
                                 : "No activation of the left macro route");
    plan.strategy.push_back(right ? "Activating the right macro route " +
                                        after_phrase(*right, smallest)
                                  : "No activation of the right macro route");
  }
  std::optional<double> micro_threshold = plan.micro_alone_threshold_hr;
  if (plan.macro_micro_threshold_hr &&
      (!micro_threshold || *plan.macro_micro_threshold_hr < *micro_threshold))
    micro_threshold = plan.macro_micro_threshold_hr;
  plan.strategy.push_back(micro_threshold
                              ? "Activating the micro route " + after_phrase(*micro_threshold, smallest)
                              : "No activation of the micro route");
  return plan;
}

std::vector<SweepRow> response_sweep(
    const std::vector<double>& rates, const std::vector<double>& durations_hr,
    const std::function<ActivationInputs(double)>& inputs_for_rate) {
  if (!inputs_for_rate) throw std::invalid_argument("response_sweep: no fixture callback");
  std::vector<SweepRow> rows;
  for (double rate : rates) {
    SweepRow row;
    row.response_rate = rate;
    row.plan = activation_plan(durations_hr, rate, inputs_for_rate(rate));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

BracketTable bracket_table_from_json(const nlohmann::json& j, const std::string& context) {
  if (!j.is_array())
    throw std::runtime_error(context + ": expected an array of [upper_hr, delay_min] pairs");
  std::vector<std::pair<double, double>> entries;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      throw std::runtime_error(context + ": each entry must be a numeric [upper_hr, delay_min]");
    entries.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  return BracketTable(std::move(entries));
}

double number_field(const nlohmann::json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number())
    throw std::runtime_error(context + ": missing numeric field '" + key + "'");
  return j[key].get<double>();
}

}  // namespace

std::map<double, ActivationInputs> load_activation_fixtures(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("activation fixtures " + path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("rates") || !doc["rates"].is_object())
    throw std::runtime_error("activation fixtures " + path +
                             ": expected an object with a 'rates' map");
  std::map<double, ActivationInputs> out;
  for (const auto& [key, body] : doc["rates"].items()) {
    double rate = 0.0;
    try {
      std::size_t used = 0;
      rate = std::stod(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw std::runtime_error("activation fixtures " + path + ": rate key '" + key +
                               "' is not a number");
    }
    if (rate < 0.0 || rate > 1.0)
      throw std::runtime_error("activation fixtures " + path + ": rate " + key +
                               " outside [0, 1]");
    const std::string ctx = path + " rate " + key;
    ActivationInputs in;
    in.upstream_min = number_field(body, "upstream_min", ctx);
    in.micro_full_min = number_field(body, "micro_full_min", ctx);
    in.micro_residual_min = number_field(body, "micro_residual_min", ctx);
    in.macro_left_min = number_field(body, "macro_left_min", ctx);
    in.macro_right_min = number_field(body, "macro_right_min", ctx);
    in.down_micro_min = number_field(body, "down_micro_min", ctx);
    in.down_left_min = number_field(body, "down_left_min", ctx);
    in.down_right_min = number_field(body, "down_right_min", ctx);
    in.down_macro_micro_min = number_field(body, "down_macro_micro_min", ctx);
    if (!body.contains("delay_full_min") || !body.contains("delay_residual_min"))
      throw std::runtime_error(ctx + ": missing delay tables");
    in.delay_full_min = bracket_table_from_json(body["delay_full_min"], ctx + " delay_full_min");
    in.delay_residual_min =
        bracket_table_from_json(body["delay_residual_min"], ctx + " delay_residual_min");
    out.emplace(rate, std::move(in));
  }
  if (out.empty())
    throw std::runtime_error("activation fixtures " + path + ": no rates defined");
  return out;
}

ActivationInputs derive_inputs(const Network& net, const ClosureScenario& closure,
                               const LinkFlows& background, const CorridorSpec& spec,
                               const ArrivalCurve& arrivals, const QueueParams& qp,
                               double response_rate, const SpeedFlowParams& sp) {
  if (response_rate < 0.0 || response_rate > 1.0)
    throw std::invalid_argument("derive_inputs: response rate must lie in [0, 1]");
  if (spec.interrupted_flow_vph < 0.0)
    throw std::invalid_argument("derive_inputs: interrupted flow must be non-negative");
  if (spec.brackets.empty())
    throw std::invalid_argument("derive_inputs: need at least one duration bracket");
  if (spec.rep_fraction < 0.0 || spec.rep_fraction > 1.0)
    throw std::invalid_argument("derive_inputs: representative fraction must lie in [0, 1]");

  // Alternatives around the closed section.
  const Itinerary left = extract_itinerary(net, closure, spec.diversion_node, spec.reentry_left,
                                           ItineraryKind::macro_left);
  const Itinerary right = extract_itinerary(net, closure, spec.diversion_node,
                                            spec.reentry_right, ItineraryKind::macro_right);
  const Itinerary micro =
      extract_itinerary(net, closure, spec.diversion_node, spec.micro_end, ItineraryKind::micro);

  // Main-route legs in normal conditions, for the right-hand side of the
  // comparison. The closure's cost enters through the delay term instead.
  const Itinerary main_left =
      shortest_path(net, spec.diversion_node, spec.reentry_left, std::nullopt);
  const Itinerary main_right =
      shortest_path(net, spec.diversion_node, spec.reentry_right, std::nullopt);
  const Itinerary main_micro =
      shortest_path(net, spec.diversion_node, spec.micro_end, std::nullopt);

  const auto diverted_split =
      branch_split(response_rate * spec.interrupted_flow_vph,
                   {spec.left_weight, spec.right_weight});
  auto loaded = [&](const Itinerary& itin, double extra_vph) {
    LinkFlows added;
    for (const auto& id : itin.link_ids) added.add(id, extra_vph);
    return route_time_min(net, itin, background, added, sp);
  };

  ActivationInputs in;
  in.upstream_min = 0.0;
  in.micro_full_min = loaded(micro, spec.interrupted_flow_vph);
  in.micro_residual_min = loaded(micro, (1.0 - response_rate) * spec.interrupted_flow_vph);
  in.macro_left_min = loaded(left, diverted_split[0]);
  in.macro_right_min = loaded(right, diverted_split[1]);
  in.down_micro_min = loaded(main_micro, 0.0);
  in.down_left_min = loaded(main_left, 0.0);
  in.down_right_min = loaded(main_right, 0.0);
  in.down_macro_micro_min = in.down_micro_min;

  std::vector<double> residual_rates;
  for (double r : arrivals.hourly_rates()) residual_rates.push_back((1.0 - response_rate) * r);
  const ArrivalCurve residual(std::move(residual_rates), arrivals.start_clock(),
                              arrivals.horizon_hr());

  std::vector<std::pair<double, double>> full_entries;
  std::vector<std::pair<double, double>> residual_entries;
  for (const DurationBracket& b : spec.brackets) {
    if (!(b.hi_hr > b.lo_hr) || b.lo_hr < 0.0)
      throw std::invalid_argument("derive_inputs: brackets must satisfy 0 <= lo < hi");
    const double rep = b.lo_hr + spec.rep_fraction * (b.hi_hr - b.lo_hr);
    const DelayResult full_res = io_delay(arrivals, rep, qp);
    const DelayResult residual_res = io_delay(residual, rep, qp);
    full_entries.emplace_back(
        b.hi_hr, delay_statistic_min(full_res, io_diagram(arrivals, rep, qp), spec.statistic));
    residual_entries.emplace_back(
        b.hi_hr,
        delay_statistic_min(residual_res, io_diagram(residual, rep, qp), spec.statistic));
  }
  in.delay_full_min = BracketTable(std::move(full_entries));
  in.delay_residual_min = BracketTable(std::move(residual_entries));
  return in;
}

void write_plan_csv(const ActivationPlan& plan, const std::string& path) {
  std::ostringstream out;
  out << "duration_hr,itinerary,t_alternative_min,t_main_total_min,decision\n";
  for (const ActivationCell& c : plan.cells) {
    const std::string label =
        c.post_macro ? "micro_post_macro" : std::string(to_string(c.itinerary));
    out << num_str(c.duration_hr) << ',' << label << ',' << num_str(c.t_alternative_min) << ','
        << num_str(c.t_main_total_min) << ',' << to_string(c.decision) << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

nlohmann::json plan_to_json(const ActivationPlan& plan) {
  nlohmann::json j;
  j["response_rate"] = plan.response_rate;
  j["durations_hr"] = plan.durations_hr;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j["thresholds_hr"] = {{"micro_alone", opt(plan.micro_alone_threshold_hr)},
                        {"macro_left", opt(plan.macro_left_threshold_hr)},
                        {"macro_right", opt(plan.macro_right_threshold_hr)},
                        {"micro_post_macro", opt(plan.macro_micro_threshold_hr)}};
  nlohmann::json stages = nlohmann::json::array();
  for (double d : plan.durations_hr) {
    nlohmann::json open = nlohmann::json::array();
    if (plan.macro_left_threshold_hr && d >= *plan.macro_left_threshold_hr - 1e-9)
      open.push_back("macro_left");
    if (plan.macro_right_threshold_hr && d >= *plan.macro_right_threshold_hr - 1e-9)
      open.push_back("macro_right");
    const bool micro_open =
        (plan.micro_alone_threshold_hr && d >= *plan.micro_alone_threshold_hr - 1e-9) ||
        (plan.macro_micro_threshold_hr && d >= *plan.macro_micro_threshold_hr - 1e-9);
    if (micro_open) open.push_back("micro");
    stages.push_back({{"duration_hr", d}, {"open", open}});
  }
  j["stages"] = stages;
  j["strategy"] = plan.strategy;
  return j;
}

}  // namespace

std::string strategy_json(const ActivationPlan& plan) {
  return plan_to_json(plan).dump(2) + "\n";
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ostringstream out;
  out << "response_rate,strategy\n";
  for (const SweepRow& row : rows)
    for (const std::string& line : row.plan.strategy)
      out << num_str(row.response_rate) << ',' << line << '\n';
  write_text_file(path, out.str());
}

}  // namespace tempo
