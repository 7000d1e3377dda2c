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

#ifndef HIDS_SIGNATURE_MODEL_HPP_
#define HIDS_SIGNATURE_MODEL_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hids/core.hpp"

namespace hids {

struct StageTag { static constexpr const char* name = "stage"; };
using StageId = Identifier<StageTag>;

/// Synthetic least element. It sits below every declared stage and may not be
/// declared or referenced in edges.
inline const StageId& bottom_stage() {
  static const StageId kBottom{"\xE2\x8A\xA5"};  // ⊥
  return kBottom;
}

/// Partial order over intrusion stages, given by its covering edges. The
/// reflexive-transitive closure is materialised once at construction.
class StagePoset {
 public:
  StagePoset() = default;

  StagePoset(std::vector<StageId> stages, const std::vector<std::pair<StageId, StageId>>& edges)
      : stages_(std::move(stages)) {
    for (std::size_t i = 0; i < stages_.size(); ++i) {
      if (stages_[i] == bottom_stage()) throw PosetError("the bottom stage cannot be declared");
      if (!index_.emplace(stages_[i].str(), i).second)
        throw PosetError("duplicate stage '" + stages_[i].str() + "'");
    }
    const std::size_t n = stages_.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [lo, hi] : edges) {
      if (lo == bottom_stage() || hi == bottom_stage())
        throw PosetError("the bottom stage cannot appear in edges");
      adj[index_of(lo)].push_back(index_of(hi));
    }
    reach_.assign(n, std::vector<char>(n, 0));
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::size_t> stack{s};
      reach_[s][s] = 1;
      while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t v : adj[u]) {
          if (v == s) throw PosetError("stage order has a cycle through '" + stages_[s].str() + "'");
          if (!reach_[s][v]) {
            reach_[s][v] = 1;
            stack.push_back(v);
          }
        }
      }
    }
    edges_ = edges;
  }

  const std::vector<StageId>& stages() const noexcept { return stages_; }
  const std::vector<std::pair<StageId, StageId>>& edges() const noexcept { return edges_; }

  bool contains(const StageId& s) const { return s == bottom_stage() || index_.count(s.str()) != 0; }

  /// a ≤ b: equal, a is bottom, or b reachable from a.
  bool leq(const StageId& a, const StageId& b) const {
    if (a == bottom_stage()) {
      if (!contains(b)) throw UnknownStage(b.str());
      return true;
    }
    const std::size_t ia = index_of(a);
    if (b == bottom_stage()) return false;
    return reach_[ia][index_of(b)] != 0;
  }

  bool comparable(const StageId& a, const StageId& b) const { return leq(a, b) || leq(b, a); }

 private:
  std::size_t index_of(const StageId& s) const {
    auto it = index_.find(s.str());
    if (it == index_.end()) throw UnknownStage(s.str());
    return it->second;
  }

  std::vector<StageId> stages_;
  std::vector<std::pair<StageId, StageId>> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<char>> reach_;
};

inline bool poset_leq(const StagePoset& poset, const StageId& a, const StageId& b) {
  return poset.leq(a, b);
}

struct Threshold {
  std::size_t count = 1;
  std::size_t window = 1;  // most recent events of the session, this one included
};

struct EventPattern {
  std::string subject_pat = "*";
  std::string program_pat = "*";
  std::string op_pat = "*";
  std::string object_pat = "*";
  std::optional<Threshold> threshold;

  void check() const {
    for (const auto* p : {&subject_pat, &program_pat, &op_pat, &object_pat})
      if (p->empty()) throw InvalidValue("signature match patterns must be non-empty");
    if (threshold) {
      if (threshold->count < 1) throw InvalidValue("threshold count must be at least 1");
      if (threshold->window < threshold->count)
        throw InvalidValue("threshold window must be at least the count");
    }
  }

  bool matches(const OperationEvent& e) const noexcept {
    return glob_match(subject_pat, e.subject.str()) && glob_match(program_pat, e.program.str()) &&
           glob_match(op_pat, e.op.str()) && glob_match(object_pat, e.object.str());
  }
};

struct Signature {
  std::string id;
  StageId stage;
  EventPattern matcher;
};

struct Scenario {
  std::string id;
  std::vector<std::string> steps;
};

using SignatureIndex = std::map<std::string, Signature, std::less<>>;

inline SignatureIndex index_signatures(std::span<const Signature> signatures) {
  SignatureIndex index;
  for (const auto& s : signatures)
    if (!index.emplace(s.id, s).second) throw InvalidValue("duplicate signature id '" + s.id + "'");
  return index;
}

// ---------------------------------------------------------------------------
// Scenario well-formedness

struct ScenarioViolation {
  enum class Kind {
    Repeated = 1,     // same signature at two positions
    Regressing = 2,   // later step not at or above an earlier step's stage
    TooLong = 3,      // more steps than signatures exist
  };
  Kind kind;
  std::size_t first;
  std::size_t second;

  int condition() const noexcept { return static_cast<int>(kind); }
  friend bool operator==(const ScenarioViolation&, const ScenarioViolation&) = default;
};

inline std::string describe(const ScenarioViolation& v) {
  switch (v.kind) {
    case ScenarioViolation::Kind::Repeated:
      return "condition 1 (distinct signatures) violated at indices (" + std::to_string(v.first) + "," +
             std::to_string(v.second) + ")";
    case ScenarioViolation::Kind::Regressing:
      return "condition 2 (non-decreasing stages) violated at indices (" + std::to_string(v.first) +
             "," + std::to_string(v.second) + ")";
    case ScenarioViolation::Kind::TooLong:
      return "scenario length " + std::to_string(v.first) + " exceeds signature count " +
             std::to_string(v.second);
  }
  return {};
}

/// Empty result means the scenario is well-formed. Every offending index pair
/// j < k is reported, in lexicographic order.
inline std::vector<ScenarioViolation> validate_scenario(const StagePoset& poset,
                                                        const SignatureIndex& signatures,
                                                        const Scenario& scenario) {
  std::vector<const Signature*> steps;
  steps.reserve(scenario.steps.size());
  for (const auto& id : scenario.steps) {
    auto it = signatures.find(id);
    if (it == signatures.end()) throw UnknownSignatureId(id);
    steps.push_back(&it->second);
  }
  std::vector<ScenarioViolation> out;
  for (std::size_t j = 0; j < steps.size(); ++j) {
    for (std::size_t k = j + 1; k < steps.size(); ++k) {
      if (steps[j]->id == steps[k]->id)
        out.push_back({ScenarioViolation::Kind::Repeated, j, k});
      else if (!poset.leq(steps[j]->stage, steps[k]->stage))
        out.push_back({ScenarioViolation::Kind::Regressing, j, k});
    }
  }
  if (steps.size() > signatures.size())
    out.push_back({ScenarioViolation::Kind::TooLong, steps.size(), signatures.size()});
  return out;
}

/// Signatures grouped by stage. The counts always add up to the input size.
inline std::map<StageId, std::size_t> stage_partition(std::span<const Signature> signatures) {
  std::map<StageId, std::size_t> parts;
  for (const auto& s : signatures) ++parts[s.stage];
  [[maybe_unused]] const std::size_t total = std::accumulate(
      parts.begin(), parts.end(), std::size_t{0}, [](std::size_t acc, const auto& kv) { return acc + kv.second; });
  if (total != signatures.size()) throw Error("stage partition lost signatures");
  return parts;
}

/// First signature in file order whose pattern matches `event` and, for
/// threshold signatures, matches at least `count` of the last `window` events
/// of `recent` (which ends with `event`).
inline const Signature* match_signature(std::span<const Signature> signatures, const OperationEvent& event,
                                        std::span<const OperationEvent> recent) {
  for (const auto& sig : signatures) {
    if (!sig.matcher.matches(event)) continue;
    if (!sig.matcher.threshold) return &sig;
    const auto& th = *sig.matcher.threshold;
    const std::size_t span_len = std::min(th.window, recent.size());
    auto tail = recent.last(span_len);
    auto hits = static_cast<std::size_t>(
        std::count_if(tail.begin(), tail.end(), [&](const OperationEvent& e) { return sig.matcher.matches(e); }));
    if (hits >= th.count) return &sig;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Signature machine

struct SigState {
  StageId current = bottom_stage();
  std::optional<std::string> last_signature;
  std::vector<std::string> history;

  friend bool operator==(const SigState&, const SigState&) = default;
};

struct StageOutput {
  StageId stage;
  bool out_of_sequence = false;

  friend bool operator==(const StageOutput&, const StageOutput&) = default;
};

inline std::pair<SigState, StageOutput> sig_step(SigState state, const StagePoset& poset,
                                                 const Signature& signature) {
  if (!poset.contains(signature.stage) || signature.stage == bottom_stage())
    throw UnknownStage(signature.stage.str());
  if (poset.leq(signature.stage, state.current)) {
    StageOutput out{state.current, false};
    return {std::move(state), std::move(out)};
  }
  if (poset.leq(state.current, signature.stage)) {
    state.current = signature.stage;
    state.last_signature = signature.id;
    state.history.push_back(signature.id);
    StageOutput out{state.current, false};
    return {std::move(state), std::move(out)};
  }
  StageOutput out{state.current, true};
  return {std::move(state), std::move(out)};
}

// ---------------------------------------------------------------------------
// Signature database file

/// Longest threshold window, i.e. how much session history matching needs.
inline std::size_t max_window(std::span<const Signature> signatures) {
  std::size_t w = 1;
  for (const auto& s : signatures)
    if (s.matcher.threshold) w = std::max(w, s.matcher.threshold->window);
  return w;
}

struct SignatureDatabase {
  StagePoset poset;
  std::vector<Signature> signatures;  // file order, which is match priority
  SignatureIndex index;
  std::vector<Scenario> scenarios;
};

struct ScenarioReport {
  std::string scenario_id;
  std::vector<ScenarioViolation> violations;
};

namespace detail {

inline std::size_t positive_size(const nlohmann::json& j, const char* what) {
  if (!j.is_number_unsigned() || j.get<std::size_t>() == 0)
    throw InvalidValue(std::string(what) + " must be a positive integer");
  return j.get<std::size_t>();
}

inline std::string json_string(const nlohmann::json& j, const char* what) {
  if (!j.is_string()) throw InvalidValue(std::string(what) + " must be a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Parses the database without rejecting ill-formed scenarios; the violations
/// of each scenario are returned alongside.
inline std::pair<SignatureDatabase, std::vector<ScenarioReport>> load_signature_database_report(
    std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidValue(std::string("signature database is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidValue("signature database must be a JSON object");

  std::vector<StageId> stages;
  for (const auto& s : doc.value("stages", nlohmann::json::array()))
    stages.emplace_back(detail::json_string(s, "stage"));
  std::vector<std::pair<StageId, StageId>> edges;
  for (const auto& e : doc.value("edges", nlohmann::json::array())) {
    if (!e.is_array() || e.size() != 2) throw InvalidValue("each edge must be a [lower, higher] pair");
    edges.emplace_back(StageId(detail::json_string(e[0], "edge stage")),
                       StageId(detail::json_string(e[1], "edge stage")));
  }

  SignatureDatabase db;
  db.poset = StagePoset(std::move(stages), edges);

  for (const auto& s : doc.value("signatures", nlohmann::json::array())) {
    if (!s.is_object()) throw InvalidValue("each signature must be an object");
    Signature sig;
    sig.id = detail::json_string(s.value("id", nlohmann::json()), "signature id");
    if (sig.id.empty()) throw InvalidValue("signature id must be non-empty");
    sig.stage = StageId(detail::json_string(s.value("stage", nlohmann::json()), "signature stage"));
    if (sig.stage == bottom_stage() || !db.poset.contains(sig.stage))
      throw UnknownStage(sig.stage.str());
    const auto match = s.value("match", nlohmann::json::object());
    if (!match.is_object()) throw InvalidValue("signature '" + sig.id + "': match must be an object");
    sig.matcher.subject_pat = detail::json_string(match.value("subject", nlohmann::json("*")), "match.subject");
    sig.matcher.program_pat = detail::json_string(match.value("program", nlohmann::json("*")), "match.program");
    sig.matcher.op_pat = detail::json_string(match.value("op", nlohmann::json("*")), "match.op");
    sig.matcher.object_pat = detail::json_string(match.value("object", nlohmann::json("*")), "match.object");
    if (auto th = s.find("threshold"); th != s.end() && !th->is_null()) {
      Threshold t;
      t.count = detail::positive_size(th->value("count", nlohmann::json()), "threshold.count");
      t.window = detail::positive_size(th->value("window", nlohmann::json()), "threshold.window");
      sig.matcher.threshold = t;
    }
    sig.matcher.check();
    db.signatures.push_back(std::move(sig));
  }
  db.index = index_signatures(db.signatures);

  std::vector<ScenarioReport> reports;
  for (const auto& sc : doc.value("scenarios", nlohmann::json::array())) {
    Scenario scenario;
    scenario.id = detail::json_string(sc.value("id", nlohmann::json()), "scenario id");
    for (const auto& step : sc.value("steps", nlohmann::json::array()))
      scenario.steps.push_back(detail::json_string(step, "scenario step"));
    if (scenario.steps.empty()) throw InvalidValue("scenario '" + scenario.id + "' has no steps");
    auto violations = validate_scenario(db.poset, db.index, scenario);
    if (!violations.empty()) reports.push_back({scenario.id, std::move(violations)});
    db.scenarios.push_back(std::move(scenario));
  }
  return {std::move(db), std::move(reports)};
}

/// Strict loader: any scenario violation rejects the whole file.
inline SignatureDatabase load_signature_database(std::string_view text) {
  auto [db, reports] = load_signature_database_report(text);
  if (!reports.empty()) {
    std::string msg = "signature database rejected:";
    for (const auto& r : reports)
      for (const auto& v : r.violations) msg += " scenario '" + r.scenario_id + "' " + describe(v) + ";";
    throw InvalidValue(msg);
  }
  return std::move(db);
}

}  // namespace hids

#endif  // HIDS_SIGNATURE_MODEL_HPP_
