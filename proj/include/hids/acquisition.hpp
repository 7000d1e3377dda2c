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

#ifndef HIDS_ACQUISITION_HPP_
#define HIDS_ACQUISITION_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hids/core.hpp"

namespace hids {

/// Presentation level of operations and objects. Rank 0 is the finest.
struct Level {
  LevelRank rank = 0;
  std::string label;

  friend auto operator<=>(const Level& a, const Level& b) { return a.rank <=> b.rank; }
  friend bool operator==(const Level& a, const Level& b) { return a.rank == b.rank; }
};

inline std::string default_level_label(LevelRank rank) {
  switch (rank) {
    case 0: return "system-call";
    case 1: return "api";
    case 2: return "command";
    default: return "level-" + std::to_string(rank);
  }
}

inline Level make_level(LevelRank rank) { return {rank, default_level_label(rank)}; }

/// Levels an intrusion model is described at.
struct ModelDescriptor {
  std::string id;
  std::set<LevelRank> levels;

  LevelRank min_level() const {
    if (levels.empty()) throw InvalidValue("model '" + id + "' declares no levels");
    return *levels.begin();
  }
};

/// Acquisition is valid iff it is at least as fine as the finest level of
/// every model: levData <= min over models of min(levels). Returns the ids of
/// the models that break this, in input order; empty means valid.
inline std::vector<std::string> validity_check(LevelRank lev_data, std::span<const ModelDescriptor> models) {
  if (models.empty()) throw EmptyModelSet();
  std::vector<std::string> offending;
  for (const auto& m : models)
    if (m.min_level() < lev_data) offending.push_back(m.id);
  return offending;
}

inline std::vector<ModelDescriptor> load_model_descriptors(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidValue(std::string("model descriptor list is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw InvalidValue("model descriptor list must be a JSON array");
  std::vector<ModelDescriptor> out;
  std::set<std::string> seen;
  for (const auto& m : doc) {
    if (!m.is_object() || !m.contains("id") || !m["id"].is_string())
      throw InvalidValue("each model descriptor needs a string id");
    ModelDescriptor md;
    md.id = m["id"].get<std::string>();
    if (!seen.insert(md.id).second) throw InvalidValue("duplicate model id '" + md.id + "'");
    for (const auto& l : m.value("levels", nlohmann::json::array())) {
      if (!l.is_number_unsigned()) throw InvalidValue("model '" + md.id + "': levels must be non-negative integers");
      md.levels.insert(l.get<LevelRank>());
    }
    if (md.levels.empty()) throw InvalidValue("model '" + md.id + "' declares no levels");
    out.push_back(std::move(md));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compatibility transformations

/// Lifts acquisition-level names to the model vocabulary: `op_map` is the
/// operation transformation, `prog_map` the program one. Both are finite
/// exact-match functions.
struct NormalizationMap {
  LevelRank level = 0;
  std::optional<LevelRank> model_level;  // target level; defaults to `level`
  std::map<std::string, std::string> op_map;
  std::map<std::string, std::string> prog_map;

  LevelRank target_level() const noexcept { return model_level.value_or(level); }

  void check() const {
    for (const auto* m : {&op_map, &prog_map})
      for (const auto& [raw, model] : *m) {
        if (raw.empty() || model.empty()) throw InvalidValue("normalization map entries must be non-empty");
        if (model.find_first_of("\r\n") != std::string::npos)
          throw InvalidValue("normalization map values must not contain a newline");
      }
  }

  static NormalizationMap identity(LevelRank level, LevelRank model_level,
                                   std::span<const std::string> ops, std::span<const std::string> progs) {
    NormalizationMap m;
    m.level = level;
    m.model_level = model_level;
    for (const auto& o : ops) m.op_map[o] = o;
    for (const auto& p : progs) m.prog_map[p] = p;
    return m;
  }
};

inline OperationEvent normalize_event(const NormalizationMap& map, const OperationEvent& raw) {
  if (raw.level != map.level)
    throw LevelMismatch("event at level " + std::to_string(raw.level) + " fed to a map for level " +
                        std::to_string(map.level));
  auto op = map.op_map.find(raw.op.str());
  if (op == map.op_map.end()) throw UnmappedOperation(raw.op.str());
  auto prog = map.prog_map.find(raw.program.str());
  if (prog == map.prog_map.end()) throw UnmappedProgram(raw.program.str());
  OperationEvent out = raw;
  out.op = OperationKind(op->second);
  out.program = ProgramId(prog->second);
  out.level = map.target_level();
  return out;
}

namespace detail {

// nlohmann keeps the last of duplicate keys silently; this callback rejects them.
inline nlohmann::json parse_rejecting_duplicate_keys(std::string_view text, const char* what) {
  std::vector<std::set<std::string>> open_objects;
  auto cb = [&](int, nlohmann::json::parse_event_t ev, nlohmann::json& parsed) {
    switch (ev) {
      case nlohmann::json::parse_event_t::object_start:
        open_objects.emplace_back();
        break;
      case nlohmann::json::parse_event_t::object_end:
        open_objects.pop_back();
        break;
      case nlohmann::json::parse_event_t::key:
        if (!open_objects.back().insert(parsed.get<std::string>()).second)
          throw InvalidValue(std::string(what) + ": duplicate key '" + parsed.get<std::string>() + "'");
        break;
      default:
        break;
    }
    return true;
  };
  try {
    return nlohmann::json::parse(text, cb);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidValue(std::string(what) + " is not valid JSON: " + e.what());
  }
}

inline std::map<std::string, std::string> string_map(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw InvalidValue(std::string(what) + " must be an object");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_string()) throw InvalidValue(std::string(what) + " values must be strings");
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline NormalizationMap load_normalization_map(std::string_view text) {
  auto doc = detail::parse_rejecting_duplicate_keys(text, "normalization map");
  if (!doc.is_object()) throw InvalidValue("normalization map must be a JSON object");
  NormalizationMap m;
  if (!doc.contains("level") || !doc["level"].is_number_unsigned())
    throw InvalidValue("normalization map needs a non-negative integer 'level'");
  m.level = doc["level"].get<LevelRank>();
  if (doc.contains("model_level")) {
    if (!doc["model_level"].is_number_unsigned())
      throw InvalidValue("normalization map 'model_level' must be a non-negative integer");
    m.model_level = doc["model_level"].get<LevelRank>();
  }
  m.op_map = detail::string_map(doc.value("op_map", nlohmann::json::object()), "op_map");
  m.prog_map = detail::string_map(doc.value("prog_map", nlohmann::json::object()), "prog_map");
  m.check();
  return m;
}

// ---------------------------------------------------------------------------
// Acquisition-method comparison table

enum class Cell { Up, Down, Mixed };

constexpr int cell_value(Cell c) noexcept { return c == Cell::Up ? 1 : c == Cell::Down ? -1 : 0; }

constexpr std::string_view cell_symbol(Cell c) noexcept {
  return c == Cell::Up ? "up" : c == Cell::Down ? "down" : "mixed";
}

enum class Method { StandardAudit, SystemCalls, OsDrivers, Shells, PerformanceTools };
enum class Criterion {
  InformationContent,
  AbilityToAcquireInfo,
  AttackDetectionMethods,
  AnomalyDetectionMethods,
  SystemOperationAnalysis,
  Versatility,
  TransparencyForUser,
  UserFreeAcquisition,
  Protectibility,
};

inline constexpr std::size_t kMethodCount = 5;
inline constexpr std::size_t kCriterionCount = 9;

inline constexpr std::array<std::string_view, kMethodCount> kMethodNames = {
    "Standard Audit", "System Calls", "OS drivers", "Shells", "Performance Tools"};

// Command-line names. Lower-case, hyphenated row titles.
inline constexpr std::array<std::string_view, kCriterionCount> kCriterionNames = {
    "high-degree-of-information-contents",
    "ability-to-acquire-info",
    "methods-of-attack-detection",
    "anomaly-detection-methods",
    "analysis-of-system-operation",
    "versatility",
    "transparency-for-user",
    "user-free-info-acquisition",
    "protectibility",
};

constexpr std::string_view to_string(Method m) noexcept { return kMethodNames[static_cast<std::size_t>(m)]; }
constexpr std::string_view to_string(Criterion c) noexcept { return kCriterionNames[static_cast<std::size_t>(c)]; }

/// Accepts the hyphenated name, case-insensitively, with spaces or
/// underscores in place of hyphens.
inline std::optional<Criterion> parse_criterion(std::string_view name) {
  std::string norm;
  for (char c : name) {
    if (c == ' ' || c == '_') c = '-';
    norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (std::size_t i = 0; i < kCriterionCount; ++i)
    if (kCriterionNames[i] == norm) return static_cast<Criterion>(i);
  return std::nullopt;
}

/// criteria x methods grid of arrows.
class MethodTable {
 public:
  using Row = std::array<Cell, kMethodCount>;
  using Grid = std::array<Row, kCriterionCount>;

  constexpr explicit MethodTable(const Grid& grid) : grid_(grid) {}

  constexpr Cell at(Criterion c, Method m) const {
    return grid_[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)];
  }
  constexpr const Grid& grid() const noexcept { return grid_; }

  /// The published comparison for Windows host-based acquisition.
  static constexpr MethodTable standard() {
    constexpr Cell U = Cell::Up, D = Cell::Down, X = Cell::Mixed;
    //            Audit  SysCalls Drivers Shells PerfTools
    return MethodTable(Grid{{
        {D, U, D, X, X},  // high degree of information contents
        {U, X, D, U, U},  // ability to acquire info
        {U, U, U, U, U},  // methods of attack detection
        {X, U, U, U, U},  // anomaly detection methods
        {X, U, U, U, D},  // analysis of system operation
        {U, U, D, D, D},  // versatility
        {U, U, U, D, D},  // transparency for user
        {U, U, U, D, D},  // user-free info acquisition
        {D, D, U, D, D},  // protectibility
    }});
  }

 private:
  Grid grid_;
};

using Weights = std::map<Criterion, double>;

struct MethodScore {
  Method method;
  double score;
};

/// Weighted sum with Up = +1, Down = -1, Mixed = 0; descending by score, ties
/// in table column order.
inline std::vector<MethodScore> advise_method(const MethodTable& table, const Weights& weights) {
  bool any_positive = false;
  for (const auto& [c, w] : weights) {
    if (!(w >= 0.0) || w == std::numeric_limits<double>::infinity())
      throw InvalidValue("weight for '" + std::string(to_string(c)) + "' must be a finite non-negative number");
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw AllZeroWeights();

  std::vector<MethodScore> out;
  for (std::size_t m = 0; m < kMethodCount; ++m) {
    double score = 0.0;
    for (const auto& [c, w] : weights) score += w * cell_value(table.at(c, static_cast<Method>(m)));
    out.push_back({static_cast<Method>(m), score});
  }
  std::stable_sort(out.begin(), out.end(), [](const MethodScore& a, const MethodScore& b) { return a.score > b.score; });
  return out;
}

}  // namespace hids

#endif  // HIDS_ACQUISITION_HPP_
