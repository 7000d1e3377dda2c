//  Copyright 2026 The hids Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

// Command-line front end: validate, replay, advise, simulate.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hids/acquisition.hpp"
#include "hids/engine.hpp"
#include "hids/simulator.hpp"

namespace {

int run_validate(const std::string& config_path) {
  hids::EngineConfig cfg;
  try {
    cfg = hids::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return 1;
  }
  auto report = hids::cmd_validate(cfg);
  for (const auto& f : report.failures) std::cout << "FAIL " << f << '\n';
  if (report.ok()) std::cout << "OK configuration is consistent\n";
  return report.ok() ? 0 : 1;
}

int run_replay(const std::string& config_path, const std::string& events_path, bool verbose, bool no_halt,
               bool lenient, bool json) {
  hids::Engine engine;
  std::string events;
  try {
    engine = hids::load_engine(hids::load_config(config_path));
    events = hids::read_file(events_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  hids::ReplayOptions opts;
  opts.verbose = verbose;
  if (no_halt) opts.halt = false;
  if (lenient) opts.strict = false;
  try {
    auto summary = hids::replay(
        engine, events, opts, [](const hids::Alert& a) { std::cout << a.to_line() << '\n'; },
        [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; });
    std::cout.flush();
    if (json) {
      std::cerr << summary.to_json().dump() << '\n';
    } else {
      std::cerr << "summary: secure=" << summary.secure << " unsecure=" << summary.unsecure
                << " stage-alerts=" << summary.stage_alerts << " subjects=" << summary.subjects
                << " skipped-lines=" << summary.skipped_lines
                << " skipped-after-halt=" << summary.skipped_after_halt << '\n';
    }
    return summary.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << events_path << ": " << e.what() << '\n';
    return 1;
  }
}

int run_advise(const std::vector<std::string>& weight_args, bool json) {
  hids::Weights weights;
  for (const auto& arg : weight_args) {
    auto eq = arg.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --weight expects <criterion>=<number>, got '" << arg << "'\n";
      return 1;
    }
    auto crit = hids::parse_criterion(arg.substr(0, eq));
    if (!crit) {
      std::cerr << "error: unknown criterion '" << arg.substr(0, eq) << "'; known:";
      for (auto n : hids::kCriterionNames) std::cerr << ' ' << n;
      std::cerr << '\n';
      return 1;
    }
    try {
      std::size_t used = 0;
      const std::string num = arg.substr(eq + 1);
      double w = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing characters");
      weights[*crit] += w;
    } catch (const std::exception&) {
      std::cerr << "error: weight '" << arg.substr(eq + 1) << "' is not a number\n";
      return 1;
    }
  }
  const auto table = hids::MethodTable::standard();
  try {
    auto ranking = hids::advise_method(table, weights);
    if (json) std::cout << hids::advice_to_json(table, weights, ranking).dump(2) << '\n';
    else std::cout << hids::render_advice_table(table, weights, ranking);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_simulate(const std::string& scenario, std::uint64_t seed, const std::string& out,
                 const std::string& config_dir) {
  try {
    auto sim = hids::sim::simulate(scenario, seed);
    auto write = [](const std::filesystem::path& p, const std::string& text) {
      if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
      std::ofstream f(p, std::ios::binary);
      if (!f) throw hids::Error("cannot write '" + p.string() + "'");
      f << text;
    };
    write(out, hids::sim::events_document(sim));
    write(hids::sim::sidecar_path(out), hids::sim::sidecar_document(sim));
    if (!config_dir.empty()) hids::sim::write_world(config_dir);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Host-based intrusion detection: replay audit events through the unified policy/signature machine"};
  app.require_subcommand(1);

  std::string config, events, scenario, out, config_dir;
  bool verbose = false, no_halt = false, lenient = false, json = false;
  std::vector<std::string> weights;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "Load and cross-check every file referenced by a config");
  validate->add_option("--config", config, "Engine config (JSON)")->required();

  auto* replay = app.add_subcommand("replay", "Replay an event file and print alerts as JSON lines");
  replay->add_option("--config", config, "Engine config (JSON)")->required();
  replay->add_option("--events", events, "Newline-delimited JSON events")->required();
  replay->add_flag("--verbose", verbose, "Also emit Secure verdicts");
  replay->add_flag("--no-halt", no_halt, "Keep listing (flagged post_halt) after an UnSecure verdict");
  replay->add_flag("--lenient", lenient, "Skip and count malformed lines instead of failing");
  replay->add_flag("--json", json, "Print the summary as JSON on standard error");

  auto* advise = app.add_subcommand(
      "advise",
      "Rank acquisition methods by weighted criteria (up=+1, down=-1, mixed=0; ties in table column order)");
  advise->add_option("--weight", weights, "<criterion>=<non-negative number>, repeatable")->required();
  advise->add_flag("--json", json, "Emit JSON instead of a table");

  auto* simulate = app.add_subcommand("simulate", "Generate a deterministic labelled attack trace");
  simulate->add_option("--scenario", scenario, "benign | multistage | flood | policy-violation")->required();
  simulate->add_option("--seed", seed, "Random seed")->required();
  simulate->add_option("--out", out, "Event file to write; labels go to <out>.labels.jsonl")->required();
  simulate->add_option("--config-dir", config_dir, "Also write the simulator's config bundle here");

  CLI11_PARSE(app, argc, argv);

  if (*validate) return run_validate(config);
  if (*replay) return run_replay(config, events, verbose, no_halt, lenient, json);
  if (*advise) return run_advise(weights, json);
  if (*simulate) return run_simulate(scenario, seed, out, config_dir);
  return 1;
}
