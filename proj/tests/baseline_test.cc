#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "cgsim/assembly.hh"
#include "cgsim/harness.hh"
#include "cgsim/workloads.hh"

using namespace cgsim;

namespace {

std::map<int64_t, uint64_t> issue_cycles(const CoreConfig& cfg, const Program& lowered, CoreKind k,
                                         RunOptions o = {}) {
  std::map<int64_t, uint64_t> by_seq;
  o.trace = [&](const TraceEvent& e) {
    if (std::string(e.event) == "issue" && !by_seq.count(e.seq_id)) by_seq[e.seq_id] = e.cycle;
  };
  EXPECT_TRUE(run_experiment(cfg, lowered, k, o).finished);
  return by_seq;
}

Program lowered(const std::string& src) { return compile_for(CoreKind::Ooo, parse_program(src)); }

std::string independent_adds(int n) {
  std::ostringstream s;
  s << "a:\n";
  for (int i = 0; i < n; ++i) s << "  add g" << 10 + i << ", g1, " << i + 1 << "\n";
  return s.str();
}

}  // namespace

TEST(Ooo, EightIndependentAddsTakeTwoIssueCycles) {
  for (CoreKind k : {CoreKind::Ooo, CoreKind::Ino}) {
    std::set<uint64_t> cycles;
    for (const auto& [seq, c] : issue_cycles(CoreConfig{}, lowered(independent_adds(8)), k)) cycles.insert(c);
    EXPECT_EQ(cycles.size(), 2u) << core_name(k);
  }
}

TEST(Ooo, DependentChainTakesOneCyclePerOp) {
  std::ostringstream s;
  s << "a:\n";
  for (int i = 0; i < 20; ++i) s << "  add g2, g2, " << i + 1 << "\n";
  for (CoreKind k : {CoreKind::Ooo, CoreKind::Ino}) {
    std::set<uint64_t> cycles;
    for (const auto& [seq, c] : issue_cycles(CoreConfig{}, lowered(s.str()), k)) cycles.insert(c);
    EXPECT_GE(cycles.size(), 20u) << core_name(k);
    EXPECT_GE(*cycles.rbegin() - *cycles.begin(), 19u) << core_name(k);
  }
}

TEST(Ooo, BeatsInOrderOnPointerChase) {
  const Workload w = make_kernel("pointer_chase");
  const RunStats ooo = run_workload(CoreConfig{}, w, CoreKind::Ooo);
  const RunStats ino = run_workload(CoreConfig{}, w, CoreKind::Ino);
  EXPECT_GE(ooo.ipc, ino.ipc);
}

TEST(Ooo, IssueWidthBoundsIpc) {
  for (const auto& k : kernel_names()) {
    const RunStats s = run_workload(CoreConfig{}, make_kernel(k), CoreKind::Ooo);
    EXPECT_LE(s.ipc, CoreConfig{}.ooo_issue_width) << k;
  }
}

TEST(Ino, IndependentOpStallsBehindLoadUse) {
  // 0: lw misses to memory; 1 uses it; 2 is independent but in order behind 1.
  const Program p = compile_for(
      CoreKind::Ooo, parse_program(".reg g1 0x700000\na:\n  lw g2, 0(g1)\n  add g3, g2, 1\n  add g4, g5, 1\n"),
      {.schedule = false});
  const CoreConfig cfg;
  const int miss = cfg.l1_latency + cfg.l2_latency + cfg.l3_latency + cfg.mem_latency;
  const auto ino = issue_cycles(cfg, p, CoreKind::Ino);
  EXPECT_GE(ino.at(1), ino.at(0) + static_cast<uint64_t>(miss));
  EXPECT_GE(ino.at(2), ino.at(1));
  const auto ooo = issue_cycles(cfg, p, CoreKind::Ooo);
  EXPECT_LT(ooo.at(2), ooo.at(0) + static_cast<uint64_t>(miss));
}

TEST(Ino, StraightLineIpcApproachesWidth) {
  // Eight rotating registers give a dependence distance of eight, above the
  // issue width, so the bound is min(width, ILP) = 4.
  std::ostringstream s;
  for (int b = 0; b < 20; ++b) {
    s << "b" << b << ":\n";
    for (int i = 0; i < 32; ++i) s << "  add g" << 1 + i % 8 << ", g" << 1 + i % 8 << ", 1\n";
  }
  const Program p = lowered(s.str());
  for (CoreKind k : {CoreKind::Ino, CoreKind::Ooo}) {
    const RunStats st = run_experiment(CoreConfig{}, p, k);
    EXPECT_GT(st.ipc, 3.5) << core_name(k);
    EXPECT_LE(st.ipc, 4.0) << core_name(k);
  }
}

TEST(Ino, CheaperPerCycleThanOooOnEveryKernel) {
  for (const auto& k : kernel_names()) {
    const Workload w = make_kernel(k);
    const RunStats ino = run_workload(CoreConfig{}, w, CoreKind::Ino);
    const RunStats ooo = run_workload(CoreConfig{}, w, CoreKind::Ooo);
    EXPECT_LT(ino.epc, ooo.epc) << k;
  }
}

TEST(Baselines, ProgramWithHeadsIsRejectedOnlyByCgooo) {
  const Program src = make_kernel("simple_blk", 2).program;
  EXPECT_THROW(run_experiment(CoreConfig{}, src, CoreKind::CgOoo), ProgramError);
  EXPECT_TRUE(run_experiment(CoreConfig{}, compile_for(CoreKind::Ino, src), CoreKind::Ino).finished);
}

TEST(Baselines, AllCoresAgreeWithTheOracle) {
  for (uint64_t seed = 700; seed < 760; ++seed) {
    const Workload w = random_workload(seed);
    const OracleTrace ref = run_oracle(w.program);
    const auto mask = globals_used(w.program);
    for (CoreKind k : {CoreKind::CgOoo, CoreKind::Ooo, CoreKind::Ino}) {
      const RunStats s = run_workload(CoreConfig{}, w, k);
      ASSERT_TRUE(s.finished);
      EXPECT_TRUE(diff_states(ref.final_state, s.final_state, mask).empty()) << seed << " " << core_name(k);
      EXPECT_EQ(s.instructions, ref.instructions) << seed << " " << core_name(k);
    }
  }
}

TEST(Baselines, KernelsFinishOnEveryCore) {
  for (const auto& k : kernel_names())
    for (CoreKind c : {CoreKind::CgOoo, CoreKind::Ooo, CoreKind::Ino}) {
      const Workload w = make_kernel(k);
      const RunStats s = run_workload(CoreConfig{}, w, c);
      EXPECT_TRUE(s.finished) << k << " " << core_name(c);
      EXPECT_TRUE(diff_states(run_oracle(w.program).final_state, s.final_state, globals_used(w.program)).empty())
          << k << " " << core_name(c);
    }
}
