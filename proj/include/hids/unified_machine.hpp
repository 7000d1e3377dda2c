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

#ifndef HIDS_UNIFIED_MACHINE_HPP_
#define HIDS_UNIFIED_MACHINE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hids/core.hpp"
#include "hids/policy_machine.hpp"
#include "hids/signature_model.hpp"

namespace hids {

struct OpInput {
  OperationEvent event;
};

struct SigInput {
  Signature signature;
  OperationEvent event;
};

using UnifiedInput = std::variant<OpInput, SigInput>;

/// Secure, UnSecure, or the attack stage reached.
class UnifiedOutput {
 public:
  UnifiedOutput(Verdict v) : value_(v) {}            // NOLINT(google-explicit-constructor)
  UnifiedOutput(StageOutput s) : value_(std::move(s)) {}  // NOLINT(google-explicit-constructor)

  bool is_stage() const noexcept { return std::holds_alternative<StageOutput>(value_); }
  bool is_verdict() const noexcept { return std::holds_alternative<Verdict>(value_); }
  bool is_unsecure() const noexcept { return is_verdict() && verdict() == Verdict::UnSecure; }
  bool is_secure() const noexcept { return is_verdict() && verdict() == Verdict::Secure; }

  Verdict verdict() const { return std::get<Verdict>(value_); }
  const StageOutput& stage() const { return std::get<StageOutput>(value_); }

  /// "Secure" / "UnSecure" / {"stage": ..., "out_of_sequence": ...}
  nlohmann::ordered_json to_json() const {
    if (is_verdict()) return std::string(to_string(verdict()));
    nlohmann::ordered_json j;
    j["stage"] = stage().stage.str();
    j["out_of_sequence"] = stage().out_of_sequence;
    return j;
  }

  friend bool operator==(const UnifiedOutput&, const UnifiedOutput&) = default;

 private:
  std::variant<Verdict, StageOutput> value_;
};

struct UnifiedState {
  PolicyState policy;
  SigState sig;

  static UnifiedState initial(SubjectId subject) { return {PolicyState::initial(std::move(subject)), SigState{}}; }
  bool halted() const noexcept { return policy.halted(); }

  friend bool operator==(const UnifiedState&, const UnifiedState&) = default;
};

/// Signature hits take precedence over plain operations.
inline UnifiedInput classify_input(const OperationEvent& event, std::span<const Signature> signatures,
                                   std::span<const OperationEvent> recent) {
  if (const Signature* sig = match_signature(signatures, event, recent)) return SigInput{*sig, event};
  return OpInput{event};
}

inline const OperationEvent& input_event(const UnifiedInput& input) {
  return std::visit([](const auto& in) -> const OperationEvent& { return in.event; }, input);
}

inline std::pair<UnifiedState, UnifiedOutput> unified_step(UnifiedState state, const AccessMatrix& matrix,
                                                           const StagePoset& poset, const UnifiedInput& input) {
  if (state.halted()) throw MachineHalted();
  if (const auto* sig = std::get_if<SigInput>(&input)) {
    if (sig->event.subject != state.policy.subject)
      throw SubjectMismatch("event subject '" + sig->event.subject.str() + "' does not own session '" +
                            state.policy.subject.str() + "'");
    auto [next, out] = sig_step(std::move(state.sig), poset, sig->signature);
    state.sig = std::move(next);
    return {std::move(state), UnifiedOutput(std::move(out))};
  }
  const auto& op = std::get<OpInput>(input);
  auto [next, verdict] = policy_step(std::move(state.policy), matrix, op.event);
  state.policy = std::move(next);
  return {std::move(state), UnifiedOutput(verdict)};
}

/// Output the machine would produce for `input` without changing `state`.
/// Used for forensic listing after a halt, where the state is frozen.
inline UnifiedOutput unified_peek(const UnifiedState& state, const AccessMatrix& matrix, const StagePoset& poset,
                                  const UnifiedInput& input) {
  if (const auto* sig = std::get_if<SigInput>(&input)) return sig_step(state.sig, poset, sig->signature).second;
  return policy_verdict(state.policy, matrix, std::get<OpInput>(input).event);
}

// ---------------------------------------------------------------------------
// Session driver

struct StepRecord {
  UnifiedOutput output;
  std::optional<std::string> signature_id;  // set for signature-triggered steps
  bool post_halt = false;
};

/// One subject's machine plus the recent-event window its threshold
/// signatures look at. Events must arrive in file order.
class Session {
 public:
  Session(SubjectId subject, std::size_t window) : state_(UnifiedState::initial(std::move(subject))), window_(window) {}

  const UnifiedState& state() const noexcept { return state_; }
  bool halted() const noexcept { return state_.halted(); }

  /// Returns nothing when the machine has halted and `continue_after_halt`
  /// is false; the event is then dropped without entering the history.
  std::optional<StepRecord> feed(const OperationEvent& event, const AccessMatrix& matrix, const StagePoset& poset,
                                 std::span<const Signature> signatures, bool continue_after_halt) {
    if (halted() && !continue_after_halt) return std::nullopt;
    recent_.push_back(event);
    if (recent_.size() > window_) recent_.erase(recent_.begin(), recent_.end() - static_cast<std::ptrdiff_t>(window_));
    UnifiedInput input = classify_input(event, signatures, recent_);
    std::optional<std::string> sig_id;
    if (const auto* sig = std::get_if<SigInput>(&input)) sig_id = sig->signature.id;
    if (halted()) return StepRecord{unified_peek(state_, matrix, poset, input), std::move(sig_id), true};
    auto [next, out] = unified_step(std::move(state_), matrix, poset, input);
    state_ = std::move(next);
    return StepRecord{std::move(out), std::move(sig_id), false};
  }

 private:
  UnifiedState state_;
  std::vector<OperationEvent> recent_;
  std::size_t window_;
};

struct UnifiedTrace {
  struct Step {
    std::size_t index;
    UnifiedOutput output;
    bool post_halt = false;
  };
  std::vector<Step> steps;
  std::size_t skipped = 0;
};

/// Single-subject replay. With `halt` set the run stops at the first UnSecure
/// and the remaining events are counted as skipped.
inline UnifiedTrace unified_run(const AccessMatrix& matrix, const StagePoset& poset,
                                std::span<const Signature> signatures, std::span<const OperationEvent> events,
                                bool halt = true) {
  UnifiedTrace trace;
  if (events.empty()) return trace;
  Session session(events.front().subject, max_window(signatures));
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].subject != events.front().subject)
      throw SubjectMismatch("unified_run expects a single subject, found '" + events[i].subject.str() + "'");
    auto rec = session.feed(events[i], matrix, poset, signatures, !halt);
    if (!rec) {
      trace.skipped = events.size() - i;
      break;
    }
    trace.steps.push_back({i, std::move(rec->output), rec->post_halt});
  }
  return trace;
}

}  // namespace hids

#endif  // HIDS_UNIFIED_MACHINE_HPP_
