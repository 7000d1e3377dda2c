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

#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hids/unified_machine.hpp"
#include "oracles.hpp"

namespace hids {
namespace {

StagePoset line() {
  return StagePoset({StageId("recon"), StageId("exploit")}, {{StageId("recon"), StageId("exploit")}});
}

Signature make_sig(const std::string& id, const std::string& stage, const std::string& program, const std::string& op) {
  Signature s{id, StageId(stage), {}};
  s.matcher.program_pat = program;
  s.matcher.op_pat = op;
  return s;
}

const std::vector<Signature> kSigs{make_sig("probe-sig", "recon", "/usr/bin/nmap", "scan"),
                                   make_sig("exploit-sig", "exploit", "*", "setuid")};
const AccessMatrix kMatrix({AccessEntry("m", "/bin/cat", "read", "/home/m/*"), AccessEntry("m", "/usr/bin/nmap", "*", "*")});

OperationEvent ev(const std::string& p, const std::string& o, const std::string& obj) { return gen::event("m", p, o, obj); }

TEST(ClassifyInput, Precedence) {
  auto scan = ev("/usr/bin/nmap", "scan", "host:1");
  std::vector<OperationEvent> recent{scan};
  EXPECT_TRUE(std::holds_alternative<OpInput>(classify_input(scan, {}, recent)));
  auto in = classify_input(scan, kSigs, recent);
  ASSERT_TRUE(std::holds_alternative<SigInput>(in));
  EXPECT_EQ(std::get<SigInput>(in).signature.id, "probe-sig");
  // scan is also permitted by the matrix, the signature still wins
  EXPECT_TRUE(kMatrix.permits(scan.subject, scan.program, scan.op, scan.object));
  auto cat = ev("/bin/cat", "read", "/home/m/x");
  EXPECT_TRUE(std::holds_alternative<OpInput>(classify_input(cat, kSigs, std::vector<OperationEvent>{cat})));
}

TEST(UnifiedStep, Examples) {
  const auto p = line();
  auto s0 = UnifiedState::initial(SubjectId("m"));
  auto cat = ev("/bin/cat", "read", "/home/m/x");
  auto [s1, o1] = unified_step(s0, kMatrix, p, OpInput{cat});
  EXPECT_EQ(o1, UnifiedOutput(Verdict::Secure));
  EXPECT_TRUE(s1.policy.performed.contains(cat.triple()));
  EXPECT_EQ(s1.sig, s0.sig);

  auto [s2, o2] = unified_step(s0, kMatrix, p, SigInput{kSigs[1], ev("/tmp/x", "setuid", "uid:0")});
  EXPECT_EQ(o2, UnifiedOutput(StageOutput{StageId("exploit"), false}));
  EXPECT_EQ(s2.policy, s0.policy);  // a signature hit does not record an operation

  auto [s3, o3] = unified_step(s0, kMatrix, p, OpInput{ev("/bin/cat", "read", "/etc/shadow")});
  EXPECT_EQ(o3, UnifiedOutput(Verdict::UnSecure));
  EXPECT_TRUE(s3.halted());
  EXPECT_THROW(unified_step(s3, kMatrix, p, OpInput{cat}), MachineHalted);
  EXPECT_THROW(unified_step(s3, kMatrix, p, SigInput{kSigs[0], cat}), MachineHalted);
}

TEST(UnifiedOutputJson, Serialization) {
  EXPECT_EQ(UnifiedOutput(Verdict::Secure).to_json().dump(), R"("Secure")");
  EXPECT_EQ(UnifiedOutput(Verdict::UnSecure).to_json().dump(), R"("UnSecure")");
  EXPECT_EQ(UnifiedOutput(StageOutput{StageId("recon"), true}).to_json().dump(),
            R"({"stage":"recon","out_of_sequence":true})");
}

TEST(UnifiedRun, ProbeExploitThenForbidden) {
  std::vector<OperationEvent> trace{ev("/usr/bin/nmap", "scan", "host:1"), ev("/tmp/x", "setuid", "uid:0"),
                                    ev("/bin/cat", "read", "/etc/shadow"), ev("/bin/cat", "read", "/home/m/a")};
  // Hand trace: nmap scan -> probe-sig, bottom->recon; setuid -> exploit-sig,
  // recon<=exploit so advance; cat /etc/shadow matches no signature and is not
  // permitted -> UnSecure and halt; the last event is skipped.
  auto t = unified_run(kMatrix, line(), kSigs, trace);
  ASSERT_EQ(t.steps.size(), 3u);
  EXPECT_EQ(t.steps[0].output, UnifiedOutput(StageOutput{StageId("recon"), false}));
  EXPECT_EQ(t.steps[1].output, UnifiedOutput(StageOutput{StageId("exploit"), false}));
  EXPECT_EQ(t.steps[2].output, UnifiedOutput(Verdict::UnSecure));
  EXPECT_EQ(t.skipped, 1u);
}

TEST(UnifiedRun, NoHaltFlagsPostHaltAndFreezesState) {
  std::vector<OperationEvent> trace{ev("/bin/cat", "read", "/etc/shadow"), ev("/bin/cat", "read", "/home/m/a"),
                                    ev("/usr/bin/nmap", "scan", "host:1"), ev("/bin/cat", "read", "/etc/shadow")};
  auto t = unified_run(kMatrix, line(), kSigs, trace, /*halt=*/false);
  ASSERT_EQ(t.steps.size(), 4u);
  EXPECT_FALSE(t.steps[0].post_halt);
  EXPECT_EQ(t.steps[0].output, UnifiedOutput(Verdict::UnSecure));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_TRUE(t.steps[i].post_halt);
  EXPECT_EQ(t.steps[1].output, UnifiedOutput(Verdict::Secure));
  EXPECT_EQ(t.steps[2].output, UnifiedOutput(StageOutput{StageId("recon"), false}));
  EXPECT_EQ(t.steps[3].output, UnifiedOutput(Verdict::UnSecure));
  EXPECT_EQ(t.skipped, 0u);
}

// Properties -----------------------------------------------------------------------

struct Fixture {
  AccessMatrix matrix;
  StagePoset poset;
  std::vector<Signature> sigs;
};

Fixture random_fixture(std::mt19937_64& rng) {
  const std::size_t n = 1 + rng() % 6;
  auto edges = gen::random_dag(rng, n, 0.4);
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  Fixture f{AccessMatrix({AccessEntry("u", "/bin/*", "read", "*"), AccessEntry("u", "/usr/bin/vim", "write", "/tmp/*")}),
            gen::make_poset(n, edges, label),
            {}};
  for (std::size_t i = 0; i < 5; ++i) {
    Signature s{"sig" + std::to_string(i), StageId(gen::stage_name(rng() % n)), {}};
    s.matcher.op_pat = "attack" + std::to_string(i);
    f.sigs.push_back(s);
  }
  return f;
}

TEST(UnifiedProperty, ReductionToPolicyRun) {
  std::mt19937_64 rng(81);
  const char* progs[] = {"/bin/cat", "/usr/bin/vim", "/sbin/x"};
  const char* ops[] = {"read", "write"};
  const char* objs[] = {"/tmp/a", "/etc/b"};
  for (int trial = 0; trial < 200; ++trial) {
    auto f = random_fixture(rng);
    std::vector<OperationEvent> trace;
    for (std::size_t n = 1 + rng() % 25; n > 0; --n)
      trace.push_back(gen::event("u", progs[rng() % 3], ops[rng() % 2], objs[rng() % 2]));
    auto u = unified_run(f.matrix, f.poset, f.sigs, trace);
    auto p = policy_run(f.matrix, trace);
    ASSERT_EQ(u.steps.size(), p.steps.size());
    for (std::size_t i = 0; i < u.steps.size(); ++i) {
      ASSERT_EQ(u.steps[i].index, p.steps[i].first);
      ASSERT_EQ(u.steps[i].output, UnifiedOutput(p.steps[i].second));
    }
    ASSERT_EQ(u.skipped, p.skipped);
  }
}

TEST(UnifiedProperty, ReductionToSigStepAndMonotone) {
  std::mt19937_64 rng(82);
  for (int trial = 0; trial < 200; ++trial) {
    auto f = random_fixture(rng);
    std::vector<OperationEvent> trace;
    std::vector<std::size_t> which;
    for (std::size_t n = 1 + rng() % 30; n > 0; --n) {
      which.push_back(rng() % f.sigs.size());
      trace.push_back(gen::event("u", "/x", "attack" + std::to_string(which.back()), "/y"));
    }
    auto u = unified_run(f.matrix, f.poset, f.sigs, trace);
    ASSERT_EQ(u.steps.size(), trace.size());
    SigState st;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      auto [next, out] = sig_step(st, f.poset, f.sigs[which[i]]);
      ASSERT_EQ(u.steps[i].output, UnifiedOutput(out));
      if (i > 0) {
        ASSERT_TRUE(f.poset.leq(u.steps[i - 1].output.stage().stage, out.stage));
      }
      st = std::move(next);
    }
  }
}

TEST(UnifiedProperty, AtMostOneUnSecureAndLastAndDeterministic) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 300; ++trial) {
    auto f = random_fixture(rng);
    std::vector<OperationEvent> trace;
    for (std::size_t n = 1 + rng() % 25; n > 0; --n) {
      if (rng() % 3 == 0) trace.push_back(gen::event("u", "/x", "attack" + std::to_string(rng() % 5), "/y"));
      else trace.push_back(gen::event("u", rng() % 5 ? "/bin/cat" : "/sbin/x", "read", "/a"));
    }
    auto a = unified_run(f.matrix, f.poset, f.sigs, trace);
    auto b = unified_run(f.matrix, f.poset, f.sigs, trace);
    std::size_t unsecure = 0;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
      ASSERT_EQ(a.steps[i].output, b.steps[i].output);
      if (a.steps[i].output.is_unsecure()) {
        ++unsecure;
        ASSERT_EQ(i + 1, a.steps.size());
      }
    }
    ASSERT_LE(unsecure, 1u);
  }
}

}  // namespace
}  // namespace hids
