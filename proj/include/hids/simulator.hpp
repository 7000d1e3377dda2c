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

#ifndef HIDS_SIMULATOR_HPP_
#define HIDS_SIMULATOR_HPP_

#include <array>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hids/engine.hpp"

// Deterministic attack-trace generator over a small fixed world (policy,
// signature database, syscall-level normalization map). Every emitted event
// carries the output it must produce, decided when the event is designed, so
// the sidecar is ground truth for replay rather than a recording of it.

namespace hids::sim {

inline constexpr std::array<std::string_view, 4> kScenarios = {"benign", "multistage", "flood", "policy-violation"};

inline constexpr std::string_view kPolicy =
    "# simulator world: default deny\n"
    "allow * /bin/ls read /home/*\n"
    "allow alice /bin/cat read /home/alice/*\n"
    "allow alice /usr/bin/vim write /home/alice/*\n"
    "allow bob /bin/cat read /home/bob/*\n"
    "allow bob /usr/bin/vim write /home/bob/*\n"
    "allow mallory /bin/cat read /home/mallory/*\n"
    "allow eve /bin/cat read /home/eve/*\n"
    "allow * /usr/bin/ssh connect host:22\n"
    "allow eve /usr/bin/nc connect host:25\n";

inline constexpr std::string_view kSignatures = R"({
  "stages": ["recon", "exploit", "dos"],
  "edges": [["recon", "exploit"], ["recon", "dos"]],
  "signatures": [
    {"id": "probe-portscan", "stage": "recon",
     "match": {"subject": "*", "program": "/usr/bin/nmap", "op": "scan", "object": "host:*"}},
    {"id": "r2l-password-guess", "stage": "exploit",
     "match": {"subject": "*", "program": "/usr/sbin/sshd", "op": "auth-fail", "object": "account:*"}},
    {"id": "u2r-overflow", "stage": "exploit",
     "match": {"subject": "*", "program": "*", "op": "setuid", "object": "uid:0"}},
    {"id": "syn-flood", "stage": "dos",
     "match": {"subject": "*", "program": "*", "op": "connect", "object": "host:25"},
     "threshold": {"count": 3, "window": 5}}
  ],
  "scenarios": [
    {"id": "multistage", "steps": ["probe-portscan", "r2l-password-guess", "u2r-overflow"]},
    {"id": "flood", "steps": ["syn-flood"]}
  ]
}
)";

inline constexpr std::string_view kModels = R"([
  {"id": "access-policy", "levels": [1]},
  {"id": "attack-signatures", "levels": [1, 2]}
]
)";

inline constexpr LevelRank kRawLevel = 0;
inline constexpr LevelRank kModelLevel = 1;

// raw (system-call level) operation name -> model operation kind
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kOpNames = {{
    {"NtReadFile", "read"},
    {"NtWriteFile", "write"},
    {"NtConnectPort", "connect"},
    {"NtRawSocketSend", "scan"},
    {"LogonUserFailed", "auth-fail"},
    {"NtSetInformationToken", "setuid"},
}};

inline constexpr std::array<std::string_view, 8> kPrograms = {
    "/bin/ls", "/bin/cat", "/usr/bin/vim", "/usr/bin/ssh", "/usr/bin/nc", "/usr/bin/nmap", "/usr/sbin/sshd",
    "/tmp/.x/overflow"};

inline std::string map_document() {
  nlohmann::ordered_json j;
  j["level"] = kRawLevel;
  j["model_level"] = kModelLevel;
  nlohmann::ordered_json ops = nlohmann::ordered_json::object(), progs = nlohmann::ordered_json::object();
  for (const auto& [raw, model] : kOpNames) ops[std::string(raw)] = std::string(model);
  for (const auto& p : kPrograms) progs[std::string(p)] = std::string(p);
  j["op_map"] = std::move(ops);
  j["prog_map"] = std::move(progs);
  return j.dump(2) + "\n";
}

inline std::string config_document() {
  return R"({
  "policy": "policy.txt",
  "signatures": "signatures.json",
  "maps": ["map-syscall.json"],
  "models": "models.json",
  "options": {"strict": true, "halt": true}
}
)";
}

/// Writes the world's config bundle; returns the path of config.json.
inline std::filesystem::path write_world(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const char* name, std::string_view text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
    out << text;
  };
  put("policy.txt", kPolicy);
  put("signatures.json", kSignatures);
  put("map-syscall.json", map_document());
  put("models.json", kModels);
  put("config.json", config_document());
  return dir / "config.json";
}

/// SplitMix64; fixed arithmetic so traces are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// Uniform-ish integer in [lo, hi].
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(next() % (hi - lo + 1)); }

 private:
  std::uint64_t state_;
};

struct Simulation {
  std::vector<OperationEvent> events;  // raw, acquisition level
  std::vector<Alert> expected;         // one per processed event, Secure included
};

namespace detail {

struct Planned {
  std::string program;
  std::string op;  // model-level kind
  std::string object;
  UnifiedOutput output = Verdict::Secure;
  std::string signature;  // empty for operation-triggered outputs
  bool skipped = false;   // arrives after the subject's halt
};

inline std::string raw_op(std::string_view model) {
  for (const auto& [raw, m] : kOpNames)
    if (m == model) return std::string(raw);
  throw Error("simulator has no raw name for '" + std::string(model) + "'");
}

inline std::string timestamp(std::size_t index) {
  const std::size_t secs = index % 60, mins = (index / 60) % 60, hours = 8 + index / 3600;
  char buf[64];
  std::snprintf(buf, sizeof buf, "2026-03-01T%02zu:%02zu:%02zuZ", hours, mins, secs);
  return buf;
}

inline Planned secure_op(std::string program, std::string op, std::string object) {
  return {std::move(program), std::move(op), std::move(object), Verdict::Secure, "", false};
}

inline Planned benign(Rng& rng, const std::string& subject) {
  const bool can_write = subject == "alice" || subject == "bob";
  const std::size_t k = rng.between(0, 9);
  switch (rng.between(0, can_write ? 3 : 2)) {
    case 0: return secure_op("/bin/ls", "read", "/home/" + subject + "/");
    case 1: return secure_op("/bin/cat", "read", "/home/" + subject + "/notes-" + std::to_string(k) + ".txt");
    case 2: return secure_op("/usr/bin/ssh", "connect", "host:22");
    default: return secure_op("/usr/bin/vim", "write", "/home/" + subject + "/draft-" + std::to_string(k) + ".txt");
  }
}

inline void benign_run(Rng& rng, const std::string& subject, std::size_t n, std::vector<Planned>& out) {
  for (std::size_t i = 0; i < n; ++i) out.push_back(benign(rng, subject));
}

inline Planned stage_hit(std::string program, std::string op, std::string object, const char* stage,
                         const char* signature) {
  return {std::move(program), std::move(op), std::move(object), StageOutput{StageId(stage), false}, signature, false};
}

}  // namespace detail

inline Simulation simulate(std::string_view scenario, std::uint64_t seed) {
  using detail::Planned;
  Rng rng(seed);
  std::vector<std::pair<std::string, std::vector<Planned>>> tracks;

  auto background = [&](const std::string& subject, std::size_t lo, std::size_t hi) {
    std::vector<Planned> t;
    detail::benign_run(rng, subject, rng.between(lo, hi), t);
    tracks.emplace_back(subject, std::move(t));
  };

  if (scenario == "benign") {
    background("alice", 10, 20);
    background("bob", 10, 20);
  } else if (scenario == "multistage") {
    background("alice", 8, 12);
    std::vector<Planned> t;
    detail::benign_run(rng, "mallory", rng.between(1, 3), t);
    t.push_back(detail::stage_hit("/usr/bin/nmap", "scan", "host:10.0.0." + std::to_string(rng.between(2, 254)),
                                  "recon", "probe-portscan"));
    detail::benign_run(rng, "mallory", rng.between(1, 3), t);
    t.push_back(detail::stage_hit("/usr/sbin/sshd", "auth-fail", "account:root", "exploit", "r2l-password-guess"));
    detail::benign_run(rng, "mallory", rng.between(1, 3), t);
    // stage stays at exploit: same stage, no regress
    t.push_back(detail::stage_hit("/tmp/.x/overflow", "setuid", "uid:0", "exploit", "u2r-overflow"));
    detail::benign_run(rng, "mallory", rng.between(0, 2), t);
    t.push_back({"/bin/cat", "read", "/etc/shadow", Verdict::UnSecure, "", false});
    for (std::size_t i = rng.between(1, 2); i > 0; --i) {
      t.push_back(detail::benign(rng, "mallory"));
      t.back().skipped = true;
    }
    tracks.emplace_back("mallory", std::move(t));
  } else if (scenario == "flood") {
    background("alice", 6, 10);
    // Sparse connects at least 4 events apart never put 3 into a window of 5;
    // the closing burst of three does, on its third event only.
    std::vector<Planned> t;
    const Planned connect = detail::secure_op("/usr/bin/nc", "connect", "host:25");
    detail::benign_run(rng, "eve", rng.between(0, 2), t);
    for (std::size_t i = rng.between(2, 4); i > 0; --i) {
      t.push_back(connect);
      detail::benign_run(rng, "eve", rng.between(3, 5), t);
    }
    detail::benign_run(rng, "eve", 2, t);
    t.push_back(connect);
    t.push_back(connect);
    t.push_back(detail::stage_hit("/usr/bin/nc", "connect", "host:25", "dos", "syn-flood"));
    detail::benign_run(rng, "eve", rng.between(1, 3), t);
    tracks.emplace_back("eve", std::move(t));
  } else if (scenario == "policy-violation") {
    background("alice", 6, 10);
    std::vector<Planned> t;
    detail::benign_run(rng, "bob", rng.between(3, 6), t);
    t.push_back({"/usr/bin/vim", "write", "/etc/passwd", Verdict::UnSecure, "", false});
    for (std::size_t i = rng.between(1, 2); i > 0; --i) {
      t.push_back(detail::benign(rng, "bob"));
      t.back().skipped = true;
    }
    tracks.emplace_back("bob", std::move(t));
  } else {
    throw UnknownScenario(std::string(scenario));
  }

  // Interleave the per-subject tracks, keeping each track's own order.
  std::vector<std::size_t> cursor(tracks.size(), 0);
  Simulation sim;
  for (;;) {
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < tracks.size(); ++i)
      if (cursor[i] < tracks[i].second.size()) live.push_back(i);
    if (live.empty()) break;
    const std::size_t pick = live[rng.between(0, live.size() - 1)];
    const Planned& p = tracks[pick].second[cursor[pick]++];
    const std::size_t index = sim.events.size();

    OperationEvent ev;
    ev.ts = detail::timestamp(index);
    ev.subject = SubjectId(tracks[pick].first);
    ev.program = ProgramId(p.program);
    ev.object = ObjectId(p.object);
    ev.op = OperationKind(detail::raw_op(p.op));
    ev.level = kRawLevel;
    sim.events.push_back(ev);
    if (p.skipped) continue;

    Alert a;
    a.event_index = index;
    a.ts = ev.ts;
    a.subject = ev.subject;
    a.output = p.output;
    if (p.signature.empty()) a.trigger = OpTriple{ProgramId(p.program), OperationKind(p.op), ObjectId(p.object)};
    else a.trigger = p.signature;
    sim.expected.push_back(std::move(a));
  }
  return sim;
}

inline std::string events_document(const Simulation& sim) {
  std::string out;
  for (const auto& e : sim.events) out += event_to_json(e).dump() + '\n';
  return out;
}

inline std::string sidecar_document(const Simulation& sim) {
  std::string out;
  for (const auto& a : sim.expected) out += a.to_line() + '\n';
  return out;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& events_path) {
  return events_path.string() + ".labels.jsonl";
}

}  // namespace hids::sim

#endif  // HIDS_SIMULATOR_HPP_
