// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tempo/activation.hpp"
#include "tempo/demand.hpp"
#include "tempo/evacuation.hpp"
#include "tempo/netmodel.hpp"
#include "tempo/queueing.hpp"

namespace tempo {

/// Closure spec plus the diversion geometry needed for itinerary extraction.
struct ClosureConfig {
  std::vector<std::string> links;
  double start_clock = 12.0;
  double duration_hr = 1.0;
  std::vector<std::string> barriers;
  std::string diversion_node;
  std::string reentry_left;
  std::string reentry_right;
  std::string micro_end;
  double interrupted_flow_vph = 0.0;
  double left_weight = 0.5;
  double right_weight = 0.5;
};

/// One JSON document drives every command; the "paper-a1-flood" profile
/// embeds the published study constants so the decision tables reproduce
/// without external data.
struct ScenarioConfig {
  std::string network_path;
  std::string od_path;
  std::string evacuation_path;
  std::string activation_fixture_path;
  std::optional<ClosureConfig> closure;
  std::vector<double> durations_hr;
  std::vector<double> response_rates;
  QueueParams queue;
  DayTypeCalendar calendar;
  HourlyProfile hourly_profile;
  std::vector<double> arrival_flows_vph;
  double arrival_horizon_hr = 12.0;
  DelayStatistic statistic = DelayStatistic::maximum;
  double rep_fraction = 0.5;
  SpeedFlowParams speed;
  std::string output_dir;
  std::string base_dir;  // directory of the config file; relative paths resolve against it
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig paper_a1_flood_profile();

/// Applies the output-dir precedence: --out flag, then config, then the
/// TEMPO_OUT_DIR environment variable, then ./out.
std::string resolve_output_dir(const ScenarioConfig& config, const std::string& out_flag);

/// Base and closed-network all-or-nothing flows plus the disrupted/diverted
/// decomposition; writes the four link-flow CSVs and, when the closure config
/// names diversion points, the itinerary exports.
void cmd_assign(const ScenarioConfig& config, const std::string& out_dir);

/// Activation decision tables and the staged strategy summary.
void cmd_activate(const ScenarioConfig& config, const std::string& out_dir);

/// Input-output diagram delay statistics per configured duration.
void cmd_delay(const ScenarioConfig& config, const std::string& out_dir);

/// Cumulative-curve samples per configured duration.
void cmd_curves(const ScenarioConfig& config, const std::string& out_dir);

/// Evacuation scenario matrix: allocation strategies x departure profiles.
void cmd_evacuate(const ScenarioConfig& config, const std::string& out_dir);

/// Driver response-rate sensitivity table.
void cmd_sweep(const ScenarioConfig& config, const std::string& out_dir);

}  // namespace tempo
