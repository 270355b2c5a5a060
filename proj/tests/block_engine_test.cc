#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "cgsim/assembly.hh"
#include "cgsim/block_window.hh"
#include "cgsim/harness.hh"
#include "cgsim/workloads.hh"

using namespace cgsim;

namespace {

Instruction op(Opcode o, std::optional<RegisterRef> d, std::optional<RegisterRef> a,
               std::optional<RegisterRef> b = std::nullopt) {
  Instruction i;
  i.op = o;
  i.dest = d;
  i.src = {a, b};
  return i;
}

RegisterRef r(int i) { return RegisterRef::local(static_cast<uint8_t>(i)); }
RegisterRef g(int i) { return RegisterRef::global(static_cast<uint8_t>(i)); }

// Pairwise legality written out directly from the issue rule.
bool may_pass(const Instruction& older, const Instruction& younger) {
  auto same = [](const std::optional<RegisterRef>& x, const std::optional<RegisterRef>& y) {
    return x && y && *x == *y;
  };
  for (const auto& s : younger.src)
    if (same(older.dest, s)) return false;
  for (const auto& s : older.src)
    if (same(younger.dest, s)) return false;
  if (same(older.dest, younger.dest)) return false;
  return !(is_memory(older.op) && is_memory(younger.op));
}

std::optional<size_t> oracle_select(const std::vector<Instruction>& hb, const std::vector<bool>& ready) {
  std::vector<size_t> legal;
  for (size_t j = 0; j < hb.size(); ++j) {
    if (!ready[j]) continue;
    bool ok = true;
    for (size_t i = 0; i < j; ++i) ok = ok && may_pass(hb[i], hb[j]);
    if (ok) legal.push_back(j);
  }
  if (legal.empty()) return std::nullopt;
  return legal.front();
}

std::vector<TraceEvent> trace_run(const CoreConfig& cfg, const Program& p) {
  std::vector<TraceEvent> ev;
  RunOptions o;
  o.trace = [&](const TraceEvent& e) { ev.push_back(e); };
  EXPECT_TRUE(run_experiment(cfg, p, CoreKind::CgOoo, o).finished);
  return ev;
}

}  // namespace

TEST(Skipahead, IssueModelExample) {
  // 1: lw r1, 0(g1)  2: add r2, r1, g2  3: add r3, g3, g4  4: add r4, r2, g5
  const std::vector<Instruction> code{op(Opcode::Lw, r(1), g(1)), op(Opcode::Add, r(2), r(1), g(2)),
                                      op(Opcode::Add, r(3), g(3), g(4)), op(Opcode::Add, r(4), r(2), g(5))};
  // Cycle 0: HB holds 1..3 and only 1 is ready.
  std::vector<HbSlot> hb{{&code[0], true}, {&code[1], false}, {&code[2], true}};
  ASSERT_EQ(skipahead_select(hb), std::optional<size_t>(0));
  // Cycle 1: 1 has issued; 2 waits for the load, 3 may skip it.
  hb = {{&code[1], false}, {&code[2], true}, {&code[3], false}};
  ASSERT_EQ(skipahead_select(hb), std::optional<size_t>(1));
  // 4 is ready only in the sense of its global source; it still needs r2.
  hb = {{&code[1], false}, {&code[3], true}};
  EXPECT_FALSE(skipahead_select(hb).has_value());
  hb = {{&code[1], true}, {&code[3], false}};
  EXPECT_EQ(skipahead_select(hb), std::optional<size_t>(0));
}

TEST(Skipahead, FalseDependenciesBlock) {
  const Instruction reads_g4 = op(Opcode::Add, g(2), g(4), g(5));
  const Instruction writes_g4 = op(Opcode::Add, g(4), g(6), g(7));
  std::vector<HbSlot> hb{{&reads_g4, false}, {&writes_g4, true}};
  EXPECT_FALSE(skipahead_select(hb).has_value());
  EXPECT_TRUE(skipahead_conflict(reads_g4, writes_g4));

  const Instruction writes_g2 = op(Opcode::Add, g(2), g(8), g(9));
  EXPECT_TRUE(skipahead_conflict(reads_g4, writes_g2));  // WAW

  const Instruction ld = op(Opcode::Lw, g(10), g(11));
  const Instruction st = op(Opcode::Sw, std::nullopt, g(12), g(13));
  EXPECT_TRUE(skipahead_conflict(ld, st));
  EXPECT_TRUE(skipahead_conflict(ld, ld));

  const Instruction unrelated = op(Opcode::Xor, g(20), g(21), g(22));
  EXPECT_FALSE(skipahead_conflict(reads_g4, unrelated));
}

TEST(Skipahead, MatchesBruteForceOnRandomWindows) {
  std::mt19937_64 rng(7);
  const Opcode ops[] = {Opcode::Add, Opcode::Mul, Opcode::Lw, Opcode::Sw, Opcode::Xor};
  int issued = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    // Random 5-op block drained through a Head Buffer of 1..4 entries.
    std::vector<Instruction> block;
    for (int k = 0; k < 5; ++k) {
      const Opcode o = ops[rng() % 5];
      auto reg = [&]() -> RegisterRef { return rng() % 2 ? r(static_cast<int>(rng() % 4)) : g(static_cast<int>(rng() % 4)); };
      block.push_back(op(o, o == Opcode::Sw ? std::nullopt : std::optional(reg()), reg(),
                         rng() % 2 ? std::optional(reg()) : std::nullopt));
    }
    const size_t hb_size = 1 + rng() % 4;
    std::vector<size_t> window;
    size_t next = 0;
    for (int cycle = 0; cycle < 50 && (next < block.size() || !window.empty()); ++cycle) {
      while (window.size() < hb_size && next < block.size()) window.push_back(next++);
      std::vector<HbSlot> hb;
      std::vector<Instruction> insts;
      std::vector<bool> ready;
      for (size_t idx : window) {
        const bool rd = rng() % 3 != 0;
        hb.push_back({&block[idx], rd});
        insts.push_back(block[idx]);
        ready.push_back(rd);
      }
      const auto got = skipahead_select(hb);
      ASSERT_EQ(got, oracle_select(insts, ready)) << "trial " << trial << " cycle " << cycle;
      if (got) {
        window.erase(window.begin() + static_cast<long>(*got));
        ++issued;
      }
    }
  }
  EXPECT_GT(issued, 5000);
}

TEST(Wakeup, LocalWritesSearchOnlyTheirOwnWindow) {
  CoreConfig cfg;
  const int nbw = cfg.total_bws();
  std::string src = "a:\n";
  for (int i = 0; i < 24; ++i) src += "  add g" + std::to_string(10 + i % 6) + ", g" + std::to_string(10 + (i + 1) % 6) + ", 1\n";
  src += "b:\n";
  for (int k = 10; k < 16; ++k) src += "  li g" + std::to_string(k) + ", 0\n";
  const Program p = compile_for(CoreKind::CgOoo, parse_program(src));
  uint64_t want = 0;
  for (const auto& b : p.blocks)
    for (const auto& inst : b.body)
      if (inst.dest) want += inst.dest->rrf() ? static_cast<uint64_t>(nbw * cfg.hb_size) : static_cast<uint64_t>(cfg.hb_size);
  const RunStats s = run_experiment(cfg, p, CoreKind::CgOoo);
  uint64_t rows = 0;
  for (const auto& u : s.energy_units)
    if (u.name == "hb_cam_row") rows = u.accesses;
  EXPECT_EQ(rows, want);
  EXPECT_EQ(s.cam_compares, want);
}

TEST(Wakeup, CompareCountsStayWithinTheCamBound) {
  CoreConfig cfg;
  const uint64_t per_write = static_cast<uint64_t>(cfg.total_bws() * cfg.hb_size);
  const uint64_t max_writes = static_cast<uint64_t>(cfg.clusters * cfg.eus_per_cluster);
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const RunStats s = run_workload(cfg, random_workload(seed), CoreKind::CgOoo);
    EXPECT_LE(s.max_cam_compares_per_cycle, per_write * max_writes) << seed;
  }
}

TEST(Issue, TwoWindowsIssueInTheSameCycle) {
  CoreConfig cfg;
  cfg.fetch_width = 2;
  cfg.clusters = 1;
  cfg.bws_per_cluster = 2;
  cfg.eus_per_cluster = 2;
  cfg.grf_segments = 2;
  const Program p = compile_for(CoreKind::CgOoo, make_kernel("simple_blk", 4).program);
  std::map<uint64_t, std::set<int>> bws_per_cycle;
  uint64_t add1 = 0, last_bw0 = 0, bw0_free = 0;
  for (const auto& e : trace_run(cfg, p)) {
    const std::string ev = e.event;
    if (ev == "issue") {
      bws_per_cycle[e.cycle].insert(e.bw);
      if (e.sn == 0 && e.pc == 1) add1 = e.cycle;
      if (e.sn == 0) last_bw0 = std::max(last_bw0, e.cycle);
    }
    if (ev == "bw_free" && e.sn == 0) bw0_free = e.cycle;
  }
  size_t max_bws = 0;
  for (const auto& [c, s] : bws_per_cycle) max_bws = std::max(max_bws, s.size());
  EXPECT_EQ(max_bws, 2u);
  EXPECT_EQ(add1, 5u);
  EXPECT_EQ(last_bw0, 10u);
  EXPECT_EQ(bw0_free, 11u);
}

TEST(Issue, OneOpPerWindowAndEuLimitPerCluster) {
  CoreConfig cfg;
  cfg.clusters = 1;
  cfg.bws_per_cluster = 3;
  cfg.eus_per_cluster = 2;
  cfg.grf_segments = 3;
  for (const char* k : {"indep_alu", "block8_synth", "hoq_stress"}) {
    std::map<uint64_t, std::map<int, int>> per_cycle;
    for (const auto& e : trace_run(cfg, compile_for(CoreKind::CgOoo, make_kernel(k, 30).program)))
      if (std::string(e.event) == "issue") ++per_cycle[e.cycle][e.bw];
    int max_total = 0;
    for (const auto& [c, m] : per_cycle) {
      int total = 0;
      for (const auto& [bw, n] : m) {
        EXPECT_EQ(n, 1) << k << " cycle " << c;
        total += n;
      }
      max_total = std::max(max_total, total);
    }
    EXPECT_LE(max_total, 2) << k;
  }
}

TEST(Issue, ArbiterGrantsOldestBlocksFirst) {
  // Three single-op blocks whose sources are ready at once, two EUs: when
  // the arbiter grants two of them in a cycle, they are the oldest two.
  CoreConfig cfg;
  cfg.clusters = 1;
  cfg.bws_per_cluster = 3;
  cfg.eus_per_cluster = 2;
  cfg.grf_segments = 3;
  cfg.fetch_width = 8;
  const Program p = compile_for(
      CoreKind::CgOoo, parse_program("a:\n  add g2, g1, 1\nb:\n  add g3, g1, 2\nc:\n  add g4, g1, 3\n"));
  std::map<uint64_t, std::vector<uint64_t>> issued;
  for (const auto& e : trace_run(cfg, p))
    if (std::string(e.event) == "issue") issued[e.cycle].push_back(e.sn);
  uint64_t order = 0;
  for (const auto& [c, sns] : issued)
    for (uint64_t sn : sns) EXPECT_EQ(sn, order++);
}

TEST(Issue, ResultsIndependentOfHbSizeAndEus) {
  for (uint64_t seed = 300; seed < 330; ++seed) {
    const Workload w = random_workload(seed);
    const OracleTrace ref = run_oracle(w.program);
    const auto mask = globals_used(w.program);
    for (int hb = 1; hb <= 5; hb += 2)
      for (int eu = 1; eu <= 4; eu += 3) {
        CoreConfig cfg;
        cfg.hb_size = hb;
        cfg.eus_per_cluster = eu;
        const RunStats s = run_workload(cfg, w, CoreKind::CgOoo);
        ASSERT_TRUE(s.finished);
        EXPECT_TRUE(diff_states(ref.final_state, s.final_state, mask).empty())
            << "seed " << seed << " hb " << hb << " eu " << eu;
      }
  }
}
