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

#ifndef HIDS_TESTS_ORACLES_HPP_
#define HIDS_TESTS_ORACLES_HPP_

// Independent reference implementations used only by the tests. None of these
// call into the library's matching, ordering or checking code.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hids/core.hpp"
#include "hids/signature_model.hpp"

namespace oracle {

// Glob by exhaustive recursion: `*` tries every split point.
inline bool glob(std::string_view pat, std::string_view text) {
  if (pat.empty()) return text.empty();
  if (pat[0] == '*') {
    for (std::size_t k = 0; k <= text.size(); ++k)
      if (glob(pat.substr(1), text.substr(k))) return true;
    return false;
  }
  if (text.empty()) return false;
  if (pat[0] != '?' && pat[0] != text[0]) return false;
  return glob(pat.substr(1), text.substr(1));
}

/// Boolean matrix closure by repeated squaring of (I + A) until it stops changing.
/// Index n is the bottom element.
class Closure {
 public:
  Closure(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) : n_(n + 1) {
    m_.assign(n_, std::vector<bool>(n_, false));
    for (std::size_t i = 0; i < n_; ++i) {
      m_[i][i] = true;
      m_[n][i] = true;
    }
    for (auto [a, b] : edges) m_[a][b] = true;
    for (;;) {
      auto sq = m_;
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = 0; k < n_; ++k)
          if (m_[i][k])
            for (std::size_t j = 0; j < n_; ++j)
              if (m_[k][j]) sq[i][j] = true;
      if (sq == m_) break;
      m_ = std::move(sq);
    }
  }
  bool leq(std::size_t a, std::size_t b) const { return m_[a][b]; }
  std::size_t bottom() const { return n_ - 1; }

 private:
  std::size_t n_;
  std::vector<std::vector<bool>> m_;
};

/// Pairwise scenario checker: returns (condition, j, k) triples.
struct Violation {
  int condition;
  std::size_t j, k;
  bool operator==(const Violation&) const = default;
};

inline std::vector<Violation> check_scenario(const std::vector<std::size_t>& steps,
                                             const std::vector<std::size_t>& stage_of, const Closure& order,
                                             std::size_t pool_size) {
  std::vector<Violation> out;
  for (std::size_t j = 0; j < steps.size(); ++j)
    for (std::size_t k = j + 1; k < steps.size(); ++k) {
      if (steps[j] == steps[k]) out.push_back({1, j, k});
      else if (!order.leq(stage_of[steps[j]], stage_of[steps[k]])) out.push_back({2, j, k});
    }
  if (steps.size() > pool_size) out.push_back({3, steps.size(), pool_size});
  return out;
}

/// Number of the last `window` entries of `hits` (ending at `at`) that are true.
inline std::size_t window_count(const std::vector<bool>& hits, std::size_t at, std::size_t window) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < window && i <= at; ++i) c += hits[at - i] ? 1 : 0;
  return c;
}

}  // namespace oracle

namespace gen {

inline std::string stage_name(std::size_t i) { return "s" + std::to_string(i); }

/// Random DAG over n stages: edges only from lower to higher index.
inline std::vector<std::pair<std::size_t, std::size_t>> random_dag(std::mt19937_64& rng, std::size_t n,
                                                                    double density) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::bernoulli_distribution coin(density);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (coin(rng)) edges.emplace_back(a, b);
  // shuffle stage labels so index order is not the order
  return edges;
}

inline hids::StagePoset make_poset(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                   const std::vector<std::size_t>& label) {
  std::vector<hids::StageId> stages;
  for (std::size_t i = 0; i < n; ++i) stages.emplace_back(stage_name(label[i]));
  std::vector<std::pair<hids::StageId, hids::StageId>> e;
  for (auto [a, b] : edges) e.emplace_back(hids::StageId(stage_name(label[a])), hids::StageId(stage_name(label[b])));
  return hids::StagePoset(std::move(stages), e);
}

inline hids::OperationEvent event(const std::string& subject, const std::string& program, const std::string& op,
                                  const std::string& object) {
  hids::OperationEvent e;
  e.ts = "2026-01-01T00:00:00Z";
  e.subject = hids::SubjectId(subject);
  e.program = hids::ProgramId(program);
  e.op = hids::OperationKind(op);
  e.object = hids::ObjectId(object);
  return e;
}

}  // namespace gen

#endif  // HIDS_TESTS_ORACLES_HPP_
