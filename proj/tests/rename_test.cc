#include <gtest/gtest.h>

#include <map>
#include <set>

#include "cgsim/assembly.hh"
#include "cgsim/harness.hh"
#include "cgsim/rename.hh"
#include "cgsim/workloads.hh"

using namespace cgsim;

namespace {

struct OperandCounts {
  uint64_t global_reads = 0;
  uint64_t global_writes = 0;
  uint64_t local = 0;
};

// Counts operands by their RRF bit over the oracle's dynamic block path.
OperandCounts count_operands(const Program& compiled) {
  OperandCounts c;
  for (uint32_t b : run_oracle(compiled).path)
    for (const auto& inst : compiled.blocks[b].body) {
      for (const auto& s : inst.src)
        if (s) (s->rrf() ? c.global_reads : c.local)++;
      if (inst.dest) (inst.dest->rrf() ? c.global_writes : c.local)++;
    }
  return c;
}

std::vector<TraceEvent> trace_run(const CoreConfig& cfg, const Program& p) {
  std::vector<TraceEvent> ev;
  RunOptions o;
  o.trace = [&](const TraceEvent& e) { ev.push_back(e); };
  EXPECT_TRUE(run_experiment(cfg, p, CoreKind::CgOoo, o).finished);
  return ev;
}

CoreConfig walkthrough_config() {
  CoreConfig cfg;
  cfg.fetch_width = 2;
  cfg.clusters = 1;
  cfg.bws_per_cluster = 2;
  cfg.eus_per_cluster = 2;
  cfg.grf_segments = 2;
  return cfg;
}

}  // namespace

TEST(RenameTable, StartsWithIdentityMaps) {
  RenameTable rt(256, 8);
  EXPECT_TRUE(rt.consistent());
  EXPECT_EQ(rt.free_count(), 256u - kArchGlobals);
  for (int a = 0; a < kArchGlobals; ++a) {
    EXPECT_EQ(rt.lookup(static_cast<uint8_t>(a)), a);
    EXPECT_EQ(rt.state(static_cast<uint16_t>(a)), PhysState::Architectural);
  }
  EXPECT_THROW(RenameTable(64, 1), std::invalid_argument);
}

TEST(RenameTable, RenameUndoCommit) {
  RenameTable rt(128, 2);
  const auto m1 = rt.rename(5, 1);
  ASSERT_TRUE(m1);
  EXPECT_EQ(m1->second, 5);
  EXPECT_EQ(rt.lookup(5), m1->first);
  EXPECT_EQ(rt.state(m1->first), PhysState::Speculative);
  const auto m2 = rt.rename(5, 1);
  EXPECT_EQ(m2->second, m1->first);
  EXPECT_TRUE(rt.consistent());

  rt.undo(5, m2->first, m2->second);
  EXPECT_EQ(rt.lookup(5), m1->first);
  EXPECT_EQ(rt.state(m2->first), PhysState::Free);
  EXPECT_THROW(rt.undo(5, m2->first, m2->second), std::logic_error);

  rt.commit(5, m1->first);
  EXPECT_EQ(rt.committed(5), m1->first);
  EXPECT_EQ(rt.state(5), PhysState::Free);
  EXPECT_TRUE(rt.consistent());
  EXPECT_EQ(rt.stats.allocations, 2u);
}

TEST(RenameTable, PrefersNearestSegment) {
  // 128 registers in 4 segments of 32; segment 2 is registers 64..95.
  RenameTable rt(128, 4);
  EXPECT_EQ(rt.segment_of(64), 2);
  const auto m = rt.rename(1, 2);
  EXPECT_EQ(rt.segment_of(m->first), 2);
  // Segments 0 and 1 hold only architectural registers, so a request for 0
  // goes to the nearest segment with free entries.
  EXPECT_EQ(rt.segment_of(rt.rename(2, 0)->first), 2);
  for (int i = 0; i < 30; ++i) rt.rename(3, 2);
  EXPECT_EQ(rt.segment_of(rt.rename(4, 2)->first), 3);
}

TEST(RenameTable, ExhaustionReturnsNothing) {
  RenameTable rt(66, 1);
  EXPECT_TRUE(rt.rename(1, 0));
  EXPECT_TRUE(rt.rename(2, 0));
  EXPECT_FALSE(rt.has_free());
  EXPECT_FALSE(rt.rename(3, 0));
}

TEST(RenameCounts, LocalOperandsSkipTheTables) {
  // Block a: r <- 1; r' <- r + r; r <- r' + r'; g2 <- g1 + r. g5 and g6 are
  // overwritten by block b, so their definitions in a are block-private.
  const Program p = compile_for(
      CoreKind::CgOoo, parse_program("a:\n  li g5, 1\n  add g6, g5, g5\n  add g5, g6, g6\n  add g2, g1, g5\n"
                                     "b:\n  li g5, 0\n  li g6, 0\n"),
      {.schedule = false});
  const auto& a = p.blocks[0].body;
  EXPECT_FALSE(a[1].dest->rrf());
  EXPECT_FALSE(a[1].src[0]->rrf());
  EXPECT_TRUE(a[3].src[0]->rrf());
  EXPECT_FALSE(a[3].src[1]->rrf());

  const RunStats s = run_experiment(CoreConfig{}, p, CoreKind::CgOoo);
  EXPECT_EQ(s.rename.map_reads, 1u);    // g1
  EXPECT_EQ(s.rename.allocations, 3u);  // g2, g5, g6
  EXPECT_EQ(s.rename.local_skipped, 8u);
}

TEST(RenameCounts, MatchOperandCountsOnStraightLineCode) {
  std::string src = "a:\n";
  for (int i = 0; i < 40; ++i)
    src += "  add g" + std::to_string(10 + i % 7) + ", g" + std::to_string(10 + (i + 3) % 7) + ", g1\n";
  src += "b:\n";
  for (int r = 10; r < 17; ++r) src += "  li g" + std::to_string(r) + ", 0\n";
  const Program p = compile_for(CoreKind::CgOoo, parse_program(src));
  const OperandCounts want = count_operands(p);
  const RunStats s = run_experiment(CoreConfig{}, p, CoreKind::CgOoo);
  EXPECT_EQ(s.rename.map_reads, want.global_reads);
  EXPECT_EQ(s.rename.allocations, want.global_writes);
  EXPECT_EQ(s.rename.local_skipped, want.local);
  EXPECT_GT(want.local, 0u);
  EXPECT_EQ(s.control_squashes, 0u);
}

TEST(RenameCounts, SkipFractionTracksLocalOperandFraction) {
  for (const char* k : {"simple_blk", "hoistable_loads", "dep_chain", "indep_alu"}) {
    const Workload w = make_kernel(k);
    const Program p = compile_for(CoreKind::CgOoo, w.program);
    const OperandCounts want = count_operands(p);
    const RunStats s = run_workload(CoreConfig{}, w, CoreKind::CgOoo);
    const double got = static_cast<double>(s.rename.local_skipped) /
                       static_cast<double>(s.rename.local_skipped + s.rename.map_reads + s.rename.allocations);
    const double ref = static_cast<double>(want.local) /
                       static_cast<double>(want.local + want.global_reads + want.global_writes);
    EXPECT_NEAR(got, ref, 0.02) << k;
  }
}

TEST(BlockAllocation, WalkthroughAllocatesBw0InCycle3) {
  const Program p = compile_for(CoreKind::CgOoo, make_kernel("simple_blk", 4).program);
  uint64_t alloc = 0, first_arrival = 0;
  int bw = -1;
  for (const auto& e : trace_run(walkthrough_config(), p)) {
    if (e.sn != 0) continue;
    const std::string ev = e.event;
    if (ev == "rename" && e.pc == 0) {
      alloc = e.cycle;
      bw = e.bw;
    }
    if (ev == "arrive" && !first_arrival) first_arrival = e.cycle;
  }
  EXPECT_EQ(alloc, 3u);
  EXPECT_EQ(bw, 0);
  EXPECT_EQ(first_arrival, 4u);
}

TEST(BlockAllocation, ConsecutiveIterationsGetDistinctWindows) {
  const Program p = compile_for(CoreKind::CgOoo, make_kernel("simple_blk", 6).program);
  std::map<uint64_t, int> bw_of;
  std::vector<uint64_t> commit_order;
  for (const auto& e : trace_run(walkthrough_config(), p)) {
    const std::string ev = e.event;
    if (ev == "rename" && e.pc == 0) bw_of[e.sn] = e.bw;
    if (ev == "commit") commit_order.push_back(e.sn);
  }
  ASSERT_GE(bw_of.size(), 2u);
  EXPECT_NE(bw_of.at(0), bw_of.at(1));
  for (size_t i = 1; i < commit_order.size(); ++i) EXPECT_GT(commit_order[i], commit_order[i - 1]);
}

TEST(BlockAllocation, SingleWindowSerializesBlocks) {
  CoreConfig cfg;
  cfg.clusters = 1;
  cfg.bws_per_cluster = 1;
  cfg.grf_segments = 1;
  const Program p = compile_for(CoreKind::CgOoo, make_kernel("indep_alu", 20).program);
  std::map<uint64_t, uint64_t> alloc, freed;
  for (const auto& e : trace_run(cfg, p)) {
    const std::string ev = e.event;
    if (ev == "rename" && e.pc == 0) alloc[e.sn] = e.cycle;
    if (ev == "bw_free") freed[e.sn] = e.cycle;
  }
  for (const auto& [sn, c] : alloc)
    if (alloc.count(sn + 1) && freed.count(sn)) {
      EXPECT_GE(alloc.at(sn + 1), freed.at(sn)) << sn;
    }
  const RunStats s = run_experiment(cfg, p, CoreKind::CgOoo);
  EXPECT_LE(s.bw_occupancy.bins.rbegin()->first, 1u);
}
