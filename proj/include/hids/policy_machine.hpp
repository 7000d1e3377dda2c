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

#ifndef HIDS_POLICY_MACHINE_HPP_
#define HIDS_POLICY_MACHINE_HPP_

#include <cstddef>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hids/core.hpp"

namespace hids {

enum class Verdict { Secure, UnSecure };

constexpr std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::Secure ? "Secure" : "UnSecure";
}

enum class MachineStatus { Active, Halted };

/// Per-subject state of the access-policy machine: the operations performed
/// so far. Every triple in `performed` was Secure when it was inserted, and
/// Halted is absorbing.
struct PolicyState {
  SubjectId subject;
  std::set<OpTriple> performed;
  MachineStatus status = MachineStatus::Active;

  static PolicyState initial(SubjectId subject) { return PolicyState{std::move(subject), {}, MachineStatus::Active}; }

  bool halted() const noexcept { return status == MachineStatus::Halted; }

  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

/// Output function alone: Secure iff the triple was already performed or the
/// matrix permits it. Does not touch the state.
inline Verdict policy_verdict(const PolicyState& state, const AccessMatrix& matrix,
                              const OperationEvent& event) {
  if (state.performed.contains(event.triple())) return Verdict::Secure;
  return matrix.permits(event.subject, event.program, event.op, event.object) ? Verdict::Secure
                                                                               : Verdict::UnSecure;
}

/// One transition. Takes the state by value so callers can move it through a run.
inline std::pair<PolicyState, Verdict> policy_step(PolicyState state, const AccessMatrix& matrix,
                                                   const OperationEvent& event) {
  if (event.subject != state.subject)
    throw SubjectMismatch("event subject '" + event.subject.str() + "' does not own session '" +
                          state.subject.str() + "'");
  if (state.halted()) throw MachineHalted();

  const Verdict verdict = policy_verdict(state, matrix, event);
  if (verdict == Verdict::Secure) {
    state.performed.insert(event.triple());
  } else {
    state.status = MachineStatus::Halted;
  }
  return {std::move(state), verdict};
}

struct PolicyTrace {
  std::vector<std::pair<std::size_t, Verdict>> steps;
  std::size_t skipped = 0;  // events left unprocessed after the halt
  PolicyState final_state;
};

inline PolicyTrace policy_run(const AccessMatrix& matrix, std::span<const OperationEvent> events) {
  PolicyTrace trace;
  if (events.empty()) return trace;
  PolicyState state = PolicyState::initial(events.front().subject);
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto [next, verdict] = policy_step(std::move(state), matrix, events[i]);
    state = std::move(next);
    trace.steps.emplace_back(i, verdict);
    if (verdict == Verdict::UnSecure) {
      trace.skipped = events.size() - i - 1;
      break;
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace hids

#endif  // HIDS_POLICY_MACHINE_HPP_
