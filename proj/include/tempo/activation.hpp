// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tempo/assignment.hpp"
#include "tempo/flowtime.hpp"
#include "tempo/netmodel.hpp"
#include "tempo/queueing.hpp"

namespace tempo {

enum class Decision { hold, activate };

std::string_view to_string(Decision d);

struct RouteComparison {
  ItineraryKind kind = ItineraryKind::main;
  double t_alternative_min = 0.0;
  double t_main_upstream_min = 0.0;
  double t_main_downstream_min = 0.0;
  double t_delay_min = 0.0;
};

/// Main-route travel time including the bottleneck delay.
double main_route_total_min(double upstream_min, double downstream_min, double delay_min);

/// Open the alternative when it is no slower than the main route; a tie
/// activates.
Decision should_activate(double t_alternative_min, double t_main_total_min);

/// Step function over event-duration brackets: value(d) for the smallest
/// bracket (prev_upper, upper] containing d. Requesting a duration beyond the
/// last bracket is an error.
class BracketTable {
 public:
  BracketTable() = default;
  BracketTable(std::vector<std::pair<double, double>> upper_to_value);

  double value(double duration_hr) const;
  const std::vector<std::pair<double, double>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<double, double>> entries_;  // sorted by upper bound
};

/// Travel times and delays feeding the activation criterion, either measured
/// fixtures or values derived from a network. The four comparisons each carry
/// their own main-route downstream time; delays come in a pre-activation
/// table and a post-macro-activation (residual flow) table.
struct ActivationInputs {
  double upstream_min = 0.0;
  double micro_full_min = 0.0;      // micro route, full interrupted flow
  double micro_residual_min = 0.0;  // micro route, flow remaining after macros
  double macro_left_min = 0.0;
  double macro_right_min = 0.0;
  double down_micro_min = 0.0;
  double down_left_min = 0.0;
  double down_right_min = 0.0;
  double down_macro_micro_min = 0.0;
  BracketTable delay_full_min;
  BracketTable delay_residual_min;
};

/// The published A1-flood study values at a 60% response rate.
ActivationInputs paper_inputs();

struct ActivationCell {
  double duration_hr = 0.0;
  ItineraryKind itinerary = ItineraryKind::main;
  bool post_macro = false;
  double t_alternative_min = 0.0;
  double t_main_total_min = 0.0;
  Decision decision = Decision::hold;
};

struct ActivationPlan {
  double response_rate = 0.0;
  std::vector<double> durations_hr;
  std::vector<ActivationCell> cells;  // micro-alone, macro-left, macro-right, macro-then-micro
  std::optional<double> micro_alone_threshold_hr;
  std::optional<double> macro_left_threshold_hr;
  std::optional<double> macro_right_threshold_hr;
  std::optional<double> macro_micro_threshold_hr;  // gated on both macros being active
  std::vector<std::string> strategy;               // ordered narrative lines
};

/// Evaluates the activation criterion per duration for the four itinerary
/// comparisons, derives per-itinerary activation thresholds (decisions must
/// be monotone in duration) and composes the staged strategy narrative.
ActivationPlan activation_plan(const std::vector<double>& durations_hr, double response_rate,
                               const ActivationInputs& inputs);

struct SweepRow {
  double response_rate = 0.0;
  ActivationPlan plan;
};

/// Re-evaluates the plan across driver response rates; the fixture callback
/// supplies the rate-dependent inputs.
std::vector<SweepRow> response_sweep(const std::vector<double>& rates,
                                     const std::vector<double>& durations_hr,
                                     const std::function<ActivationInputs(double)>& inputs_for_rate);

/// Rate-tagged fixture file: {"rates": {"0.6": {...}, ...}}.
std::map<double, ActivationInputs> load_activation_fixtures(const std::string& path);

/// Diversion geometry for deriving activation inputs from a live network:
/// where the disrupted flow leaves the main route and where each alternative
/// rejoins it.
struct CorridorSpec {
  std::string diversion_node;
  std::string reentry_left;
  std::string reentry_right;
  std::string micro_end;
  double interrupted_flow_vph = 0.0;
  double left_weight = 0.5;  // branch split of the macro-diverted flow
  double right_weight = 0.5;
  std::vector<DurationBracket> brackets;
  DelayStatistic statistic = DelayStatistic::maximum;
  double rep_fraction = 0.5;
};

/// Computes ActivationInputs from the network instead of fixtures: extracts
/// the macro/micro itineraries around the closure, prices them with the
/// speed-flow model under the diverted share of the interrupted flow, and
/// fills the delay tables from the input-output diagram (full arrivals before
/// activation, (1-rate)-scaled arrivals after the macros divert).
ActivationInputs derive_inputs(const Network& net, const ClosureScenario& closure,
                               const LinkFlows& background, const CorridorSpec& spec,
                               const ArrivalCurve& arrivals, const QueueParams& qp,
                               double response_rate, const SpeedFlowParams& sp = {});

void write_plan_csv(const ActivationPlan& plan, const std::string& path);
std::string strategy_json(const ActivationPlan& plan);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace tempo
