// Part of the tempo traffic-emergency planning toolkit.
// Distributed under the Apache License, Version 2.0. (See accompanying file LICENSE)

#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "tempo/cli.hpp"

namespace {

tempo::ScenarioConfig make_config(const std::string& config_path, const std::string& profile) {
  if (!config_path.empty()) return tempo::load_config(config_path);
  if (profile == "paper-a1-flood") return tempo::paper_a1_flood_profile();
  if (!profile.empty()) throw std::runtime_error("unknown profile '" + profile + "'");
  throw std::runtime_error("supply --config <path> or --profile paper-a1-flood");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tempo: road-closure detour planning and evacuation analysis"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::string profile;
  app.add_option("--config", config_path, "scenario config JSON")->expected(1);
  app.add_option("--out", out_flag, "output directory (overrides config and TEMPO_OUT_DIR)")
      ->expected(1);
  app.add_option("--profile", profile, "named built-in scenario (paper-a1-flood)")->expected(1);

  using Command = std::function<void(const tempo::ScenarioConfig&, const std::string&)>;
  const std::map<std::string, std::pair<std::string, Command>> commands = {
      {"assign", {"all-or-nothing flows and closure diversion itineraries", tempo::cmd_assign}},
      {"activate", {"alternative-route activation decision tables", tempo::cmd_activate}},
      {"delay", {"bottleneck delay statistics per closure duration", tempo::cmd_delay}},
      {"curves", {"cumulative arrival/departure curve samples", tempo::cmd_curves}},
      {"evacuate", {"staged evacuation scenario matrix", tempo::cmd_evacuate}},
      {"sweep", {"driver response-rate sensitivity table", tempo::cmd_sweep}},
  };
  for (const auto& [name, entry] : commands)
    app.add_subcommand(name, entry.first)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const tempo::ScenarioConfig config = make_config(config_path, profile);
    const std::string out_dir = tempo::resolve_output_dir(config, out_flag);
    for (const auto& [name, entry] : commands)
      if (app.got_subcommand(name)) entry.second(config, out_dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
