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

#ifndef HIDS_ENGINE_HPP_
#define HIDS_ENGINE_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hids/acquisition.hpp"
#include "hids/core.hpp"
#include "hids/policy_machine.hpp"
#include "hids/signature_model.hpp"
#include "hids/unified_machine.hpp"

namespace hids {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error("error reading '" + path.string() + "'");
  return ss.str();
}

struct EngineOptions {
  bool strict = true;
  bool halt = true;
  std::optional<LevelRank> model_level;
};

/// Paths are absolute or relative to the config file's directory.
struct EngineConfig {
  std::filesystem::path policy;
  std::filesystem::path signatures;
  std::vector<std::filesystem::path> maps;
  std::filesystem::path models;
  EngineOptions options;
};

inline EngineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidValue(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidValue("config must be a JSON object");
  auto path_of = [&](const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) throw InvalidValue(std::string("config needs a string '") + key + "'");
    return base_dir / it->get<std::string>();
  };
  EngineConfig cfg;
  cfg.policy = path_of("policy");
  cfg.signatures = path_of("signatures");
  cfg.models = path_of("models");
  for (const auto& m : doc.value("maps", nlohmann::json::array())) {
    if (!m.is_string()) throw InvalidValue("config 'maps' must list paths");
    cfg.maps.push_back(base_dir / m.get<std::string>());
  }
  const auto opts = doc.value("options", nlohmann::json::object());
  if (!opts.is_object()) throw InvalidValue("config 'options' must be an object");
  if (opts.contains("strict")) cfg.options.strict = opts["strict"].get<bool>();
  if (opts.contains("halt")) cfg.options.halt = opts["halt"].get<bool>();
  if (opts.contains("model_level")) {
    if (!opts["model_level"].is_number_unsigned())
      throw InvalidValue("config option 'model_level' must be a non-negative integer");
    cfg.options.model_level = opts["model_level"].get<LevelRank>();
  }
  return cfg;
}

inline EngineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

/// Everything a replay needs, loaded and cross-checked.
struct Engine {
  AccessMatrix matrix;
  SignatureDatabase db;
  std::vector<NormalizationMap> maps;
  std::vector<ModelDescriptor> models;
  EngineOptions options;
};

struct ValidationReport {
  std::vector<std::string> failures;
  bool ok() const noexcept { return failures.empty(); }
};

namespace detail {

inline LevelRank finest_model_level(const std::vector<ModelDescriptor>& models) {
  LevelRank lvl = std::numeric_limits<LevelRank>::max();
  for (const auto& m : models) lvl = std::min(lvl, m.min_level());
  return lvl;
}

// Loads every component, recording failures instead of stopping at the first.
inline std::optional<Engine> load_engine_collecting(const EngineConfig& cfg, ValidationReport& report) {
  Engine engine;
  engine.options = cfg.options;
  bool complete = true;
  auto attempt = [&](const std::filesystem::path& path, auto&& fn) {
    try {
      fn(read_file(path));
    } catch (const std::exception& e) {
      report.failures.push_back(path.string() + ": " + e.what());
      complete = false;
    }
  };
  attempt(cfg.policy, [&](const std::string& text) { engine.matrix = parse_policy(text); });
  attempt(cfg.signatures, [&](const std::string& text) {
    auto [db, scenario_reports] = load_signature_database_report(text);
    for (const auto& r : scenario_reports)
      for (const auto& v : r.violations)
        report.failures.push_back("scenario '" + r.scenario_id + "': " + describe(v));
    engine.db = std::move(db);
  });
  attempt(cfg.models, [&](const std::string& text) { engine.models = load_model_descriptors(text); });
  for (const auto& p : cfg.maps)
    attempt(p, [&](const std::string& text) { engine.maps.push_back(load_normalization_map(text)); });

  if (!engine.maps.empty() && engine.models.empty() && complete)
    report.failures.push_back("normalization maps are configured but no model descriptors are");

  std::map<LevelRank, std::size_t> per_level;
  for (const auto& m : engine.maps)
    if (++per_level[m.level] == 2)
      report.failures.push_back("more than one normalization map for level " + std::to_string(m.level));

  if (!engine.models.empty()) {
    const LevelRank finest = finest_model_level(engine.models);
    for (auto& m : engine.maps) {
      if (!m.model_level) m.model_level = engine.options.model_level.value_or(finest);
      for (const auto& id : validity_check(m.level, engine.models)) {
        LevelRank need = 0;
        for (const auto& md : engine.models)
          if (md.id == id) need = md.min_level();
        report.failures.push_back("map for level " + std::to_string(m.level) +
                                  " is invalid: acquisition level " + std::to_string(m.level) +
                                  " <= min(min(model levels)) fails for model '" + id + "' (min level " +
                                  std::to_string(need) + ")");
      }
    }
  }
  if (!complete) return std::nullopt;
  return engine;
}

}  // namespace detail

/// Runs every load and cross-validation step and lists all failures.
inline ValidationReport cmd_validate(const EngineConfig& cfg) {
  ValidationReport report;
  detail::load_engine_collecting(cfg, report);
  return report;
}

/// Fail-fast variant used before a replay.
inline Engine load_engine(const EngineConfig& cfg) {
  ValidationReport report;
  auto engine = detail::load_engine_collecting(cfg, report);
  if (!report.ok()) {
    std::string msg = "configuration invalid:";
    for (const auto& f : report.failures) msg += "\n  " + f;
    throw InvalidValue(msg);
  }
  return std::move(*engine);
}

// ---------------------------------------------------------------------------
// Alerts

struct Alert {
  std::size_t event_index = 0;
  std::string ts;
  SubjectId subject;
  UnifiedOutput output = Verdict::Secure;
  std::variant<std::string, OpTriple> trigger;  // signature id or operation
  bool post_halt = false;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["event_index"] = event_index;
    j["ts"] = ts;
    j["subject"] = subject.str();
    j["output"] = output.to_json();
    if (const auto* id = std::get_if<std::string>(&trigger)) {
      j["trigger"] = {{"signature", *id}};
    } else {
      const auto& t = std::get<OpTriple>(trigger);
      nlohmann::ordered_json tr;
      tr["program"] = t.program.str();
      tr["op"] = t.op.str();
      tr["object"] = t.object.str();
      j["trigger"] = std::move(tr);
    }
    j["post_halt"] = post_halt;
    return j;
  }

  std::string to_line() const { return to_json().dump(); }
};

struct ReplaySummary {
  std::size_t secure = 0;
  std::size_t unsecure = 0;
  std::size_t stage_alerts = 0;
  std::size_t subjects = 0;
  std::size_t skipped_lines = 0;
  std::size_t skipped_after_halt = 0;

  int exit_code() const noexcept { return unsecure > 0 ? 2 : 0; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["secure"] = secure;
    j["unsecure"] = unsecure;
    j["stage_alerts"] = stage_alerts;
    j["subjects"] = subjects;
    j["skipped_lines"] = skipped_lines;
    j["skipped_after_halt"] = skipped_after_halt;
    return j;
  }
};

struct ReplayOptions {
  bool verbose = false;  // also emit Secure outputs
  std::optional<bool> halt;
  std::optional<bool> strict;
};

/// Lifts one raw event to model level using the map registered for its level.
inline OperationEvent ingest_event(const Engine& engine, const OperationEvent& raw) {
  if (engine.maps.empty()) return raw;
  for (const auto& m : engine.maps)
    if (m.level == raw.level) return normalize_event(m, raw);
  for (const auto& m : engine.maps)
    if (m.target_level() == raw.level) return raw;
  throw LevelMismatch("no normalization map for level " + std::to_string(raw.level));
}

/// Keeps one Session per subject and routes events to them in file order.
class SessionManager {
 public:
  explicit SessionManager(const Engine& engine) : engine_(engine), window_(max_window(engine.db.signatures)) {}

  std::optional<StepRecord> feed(const OperationEvent& event, bool continue_after_halt) {
    auto it = sessions_.find(event.subject);
    if (it == sessions_.end()) it = sessions_.emplace(event.subject, Session(event.subject, window_)).first;
    return it->second.feed(event, engine_.matrix, engine_.db.poset, engine_.db.signatures, continue_after_halt);
  }

  std::size_t size() const noexcept { return sessions_.size(); }
  const Session* find(const SubjectId& subject) const {
    auto it = sessions_.find(subject);
    return it == sessions_.end() ? nullptr : &it->second;
  }

 private:
  const Engine& engine_;
  std::size_t window_;
  std::map<SubjectId, Session> sessions_;
};

/// Ingest, normalise, classify and step every event. Ingest completes before
/// any machine runs, so a strict-mode failure emits no alerts. Alerts go to
/// `sink` in file order; per-line diagnostics go to `diag`.
inline ReplaySummary replay(const Engine& engine, std::string_view event_text, const ReplayOptions& opts,
                            const std::function<void(const Alert&)>& sink,
                            const std::function<void(const std::string&)>& diag = {}) {
  const bool strict = opts.strict.value_or(engine.options.strict);
  const bool halt = opts.halt.value_or(engine.options.halt);

  ReplaySummary summary;
  EventStream stream = parse_event_stream(event_text, strict ? ParseMode::Strict : ParseMode::Lenient);
  for (const auto& s : stream.skipped)
    if (diag) diag("line " + std::to_string(s.line) + ": " + s.message);
  summary.skipped_lines = stream.skipped.size();

  std::vector<OperationEvent> events;
  events.reserve(stream.events.size());
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    try {
      events.push_back(ingest_event(engine, stream.events[i]));
    } catch (const Error& e) {
      if (strict) throw ParseError(stream.lines[i], e.what());
      if (diag) diag("line " + std::to_string(stream.lines[i]) + ": " + e.what());
      ++summary.skipped_lines;
    }
  }

  SessionManager sessions(engine);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& ev = events[i];
    auto rec = sessions.feed(ev, !halt);
    if (!rec) {
      ++summary.skipped_after_halt;
      continue;
    }
    if (rec->output.is_stage()) ++summary.stage_alerts;
    else if (rec->output.is_unsecure()) ++summary.unsecure;
    else ++summary.secure;

    if (rec->output.is_secure() && !opts.verbose) continue;
    Alert alert;
    alert.event_index = i;
    alert.ts = ev.ts;
    alert.subject = ev.subject;
    alert.output = rec->output;
    if (rec->signature_id) alert.trigger = *rec->signature_id;
    else alert.trigger = ev.triple();
    alert.post_halt = rec->post_halt;
    if (sink) sink(alert);
  }
  summary.subjects = sessions.size();
  return summary;
}

// ---------------------------------------------------------------------------
// Method advisor rendering

inline std::string render_advice_table(const MethodTable& table, const Weights& weights,
                                       const std::vector<MethodScore>& ranking) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-4s  %-18s  %8s  %s\n", "rank", "method", "score", "cells");
  out << buf;
  std::size_t rank = 1;
  for (const auto& r : ranking) {
    std::string cells;
    for (const auto& [c, w] : weights) {
      if (w == 0.0) continue;
      if (!cells.empty()) cells += ' ';
      cells += std::string(to_string(c)) + '=' + std::string(cell_symbol(table.at(c, r.method)));
    }
    std::snprintf(buf, sizeof buf, "%-4zu  %-18s  %8.3f  ", rank++, std::string(to_string(r.method)).c_str(), r.score);
    out << buf << cells << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json advice_to_json(const MethodTable& table, const Weights& weights,
                                            const std::vector<MethodScore>& ranking) {
  auto arr = nlohmann::ordered_json::array();
  std::size_t rank = 1;
  for (const auto& r : ranking) {
    nlohmann::ordered_json row;
    row["rank"] = rank++;
    row["method"] = std::string(to_string(r.method));
    row["score"] = r.score;
    nlohmann::ordered_json cells = nlohmann::ordered_json::object();
    for (const auto& [c, w] : weights)
      if (w != 0.0) cells[std::string(to_string(c))] = std::string(cell_symbol(table.at(c, r.method)));
    row["cells"] = std::move(cells);
    arr.push_back(std::move(row));
  }
  return arr;
}

}  // namespace hids

#endif  // HIDS_ENGINE_HPP_
