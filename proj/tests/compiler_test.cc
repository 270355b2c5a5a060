#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "cgsim/assembly.hh"
#include "cgsim/compiler.hh"
#include "cgsim/harness.hh"
#include "cgsim/interpreter.hh"
#include "cgsim/workloads.hh"

using namespace cgsim;

namespace {

std::string adds(int n, const std::string& tail = "") {
  std::ostringstream s;
  s << "start:\n";
  for (int i = 0; i < n; ++i) s << "  add g2, g2, " << i + 1 << "\n";
  s << tail;
  return s.str();
}

std::vector<size_t> sizes(const Program& p) {
  std::vector<size_t> out;
  for (const auto& b : p.blocks) out.push_back(b.body.size());
  return out;
}

const Instruction& find_def(const BasicBlock& b, Opcode op, int64_t imm) {
  for (const auto& i : b.body)
    if (i.op == op && i.imm == imm) return i;
  throw std::runtime_error("instruction not found");
}

// Independent ordering rules for a single-issue schedule of one block: the
// delay a later op `j` must keep after an earlier op `i`, or -1 if the pair
// may be reordered.
int pair_delay(const BasicBlock& b, int i, int j) {
  const Instruction& a = b.body[i];
  const Instruction& c = b.body[j];
  auto reads = [](const Instruction& x, const RegisterRef& r) {
    return (x.src[0] && *x.src[0] == r) || (x.src[1] && *x.src[1] == r);
  };
  if (a.dest && reads(c, *a.dest)) {
    bool nearest = true;
    for (int k = i + 1; k < j; ++k)
      if (b.body[k].dest && *b.body[k].dest == *a.dest) nearest = false;
    return nearest ? a.latency() : 1;
  }
  if (c.dest && reads(a, *c.dest)) return 1;
  if (a.dest && c.dest && *a.dest == *c.dest) return 1;
  if (is_memory(a.op) && is_memory(c.op) && (a.op == Opcode::Sw || c.op == Opcode::Sw)) return 1;
  if (is_control(c.op)) return 1;
  return -1;
}

// Makespan of `order` under the same issue model, or -1 if it breaks an
// ordering constraint.
int brute_makespan(const BasicBlock& b, const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  std::vector<int> pos(n), start(n);
  for (int k = 0; k < n; ++k) pos[order[k]] = k;
  int prev = -1, end = 0;
  for (int k = 0; k < n; ++k) {
    const int j = order[k];
    int t = prev + 1;
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      const int lo = std::min(i, j), hi = std::max(i, j);
      const int d = pair_delay(b, lo, hi);
      if (d < 0) continue;
      if (pos[lo] > pos[hi]) return -1;
      if (hi == j) t = std::max(t, start[lo] + d);
    }
    start[j] = t;
    prev = t;
    end = std::max(end, t + b.body[j].latency());
  }
  return end;
}

std::vector<int> order_of(const BasicBlock& original, const BasicBlock& scheduled) {
  std::vector<int> order;
  std::vector<bool> used(original.body.size(), false);
  for (const auto& inst : scheduled.body)
    for (size_t i = 0; i < original.body.size(); ++i)
      if (!used[i] && original.body[i] == inst) {
        used[i] = true;
        order.push_back(static_cast<int>(i));
        break;
      }
  return order;
}

}  // namespace

TEST(Partition, BoundaryCases) {
  EXPECT_EQ(sizes(partition_blocks(parse_program(adds(33)))), (std::vector<size_t>{32, 1}));
  EXPECT_EQ(sizes(partition_blocks(parse_program(adds(32)))), (std::vector<size_t>{32}));
}

TEST(Partition, SeventyOpsEndingInBne) {
  const Program src = parse_program(adds(69, "  bne g2, g3, start\n"));
  const Program p = partition_blocks(src);
  ASSERT_EQ(sizes(p), (std::vector<size_t>{32, 32, 6}));
  EXPECT_FALSE(p.blocks[0].meta.has_ctrl);
  EXPECT_FALSE(p.blocks[1].meta.has_ctrl);
  EXPECT_TRUE(p.blocks[2].meta.has_ctrl);
  EXPECT_EQ(p.blocks[2].body.back().target, 0);
}

TEST(Partition, RetargetsBranchesAfterSplit) {
  const Program src = parse_program(adds(40) + "next:\n  add g3, g3, 1\n  bne g3, g4, next\n");
  const Program p = partition_blocks(src);
  ASSERT_EQ(p.blocks.size(), 3u);
  EXPECT_EQ(p.blocks[2].body.back().target, 2);
}

TEST(Classify, LoopCounterStaysGlobal) {
  const Program p = compile(make_kernel("simple_blk").program);
  for (const auto& inst : p.blocks[0].body)
    for (const auto& s : inst.src)
      if (s && inst.op == Opcode::Bne) {
        EXPECT_EQ(s->scope, Scope::Global);
      }
  const auto& inc = find_def(p.blocks[0], Opcode::Add, 8);
  ASSERT_TRUE(inc.dest);
  EXPECT_EQ(inc.dest->scope, Scope::Global);
}

TEST(Classify, BlockPrivateValueBecomesLocal) {
  // g5 is consumed inside the first block and overwritten before it is read
  // again, so the first block's definition is block-private.
  const Program src = parse_program(
      "a:\n  add g5, g1, 1\n  add g2, g5, g2\nb:\n  li g5, 0\n");
  const Program p = classify_registers(src);
  const auto& def = p.blocks[0].body[0];
  ASSERT_TRUE(def.dest);
  EXPECT_EQ(def.dest->scope, Scope::Local);
  EXPECT_EQ(p.blocks[0].body[1].src[0], def.dest);
  EXPECT_EQ(p.blocks[0].body[1].dest->scope, Scope::Global);
  EXPECT_EQ(p.blocks[1].body[0].dest->scope, Scope::Global);
}

TEST(Classify, OverwrittenInsideBlockBecomesLocal) {
  const Program p = classify_registers(parse_program("a:\n  add g5, g1, 1\n  add g5, g5, 2\n"));
  EXPECT_EQ(p.blocks[0].body[0].dest->scope, Scope::Local);
  EXPECT_EQ(p.blocks[0].body[1].dest->scope, Scope::Global);
}

TEST(Classify, TwentyFiveValuesFillTheLrf) {
  std::ostringstream s;
  s << "a:\n  add g10, g1, 1\n";
  for (int r = 11; r < 35; ++r) s << "  add g" << r << ", g" << r - 1 << ", 1\n";
  s << "  add g2, g34, g2\nb:\n";
  for (int r = 10; r < 35; ++r) s << "  li g" << r << ", 0\n";
  const Program p = classify_registers(parse_program(s.str()));
  int local = 0, global = 0;
  std::vector<int> lrf_indices;
  for (size_t i = 0; i + 1 < p.blocks[0].body.size(); ++i) {
    const auto& d = *p.blocks[0].body[i].dest;
    if (d.scope == Scope::Local) {
      ++local;
      lrf_indices.push_back(d.index);
    } else {
      ++global;
    }
  }
  EXPECT_EQ(local, kLrfSize);
  EXPECT_EQ(global, 25 - kLrfSize);
  std::sort(lrf_indices.begin(), lrf_indices.end());
  EXPECT_EQ(std::adjacent_find(lrf_indices.begin(), lrf_indices.end()), lrf_indices.end());
  EXPECT_LT(lrf_indices.back(), kLrfSize);
}

TEST(Classify, PreservesSemanticsOnRandomPrograms) {
  for (uint64_t seed = 100; seed < 160; ++seed) {
    const Workload w = random_workload(seed);
    const auto mask = globals_used(w.program);
    const OracleTrace ref = run_oracle(w.program);
    const OracleTrace got = run_oracle(classify_registers(w.program));
    EXPECT_TRUE(diff_states(ref.final_state, got.final_state, mask).empty()) << seed;
  }
}

TEST(Liveness, EverythingLiveAtExit) {
  const Program p = parse_program("a:\n  add g1, g1, 1\n  bne g1, g2, a\nb:\n  li g3, 0\n");
  const Liveness lv = compute_liveness(p);
  EXPECT_TRUE(lv.live_out[1].all());
  EXPECT_TRUE(lv.live_in[0][1]);
  EXPECT_TRUE(lv.live_in[0][2]);
  EXPECT_FALSE(lv.live_in[1][3]);
}

TEST(Schedule, HoistsIndependentLoad) {
  const Program p = parse_program("a:\n  add g2, g3, 1\n  lw g4, 0(g5)\n");
  const BasicBlock s = list_schedule_block(p.blocks[0]);
  EXPECT_EQ(s.body[0].op, Opcode::Lw);
  EXPECT_EQ(s.body[1].op, Opcode::Add);
}

TEST(Schedule, DependentChainUnchanged) {
  const Program p =
      parse_program("a:\n  lw g2, 0(g1)\n  add g3, g2, 1\n  mul g4, g3, g3\n  sw g4, 0(g1)\n  bne g4, g5, a\n");
  EXPECT_EQ(list_schedule_block(p.blocks[0]), p.blocks[0]);
}

TEST(Schedule, DiamondMatchesExhaustiveSearch) {
  const Program p = parse_program(
      "a:\n  add g20, g2, 1\n  lw g10, 0(g1)\n  add g11, g10, 1\n  mul g12, g10, 3\n"
      "  add g13, g11, g12\n  sw g13, 0(g3)\n");
  const BasicBlock& b = p.blocks[0];
  std::vector<int> perm(b.body.size());
  std::iota(perm.begin(), perm.end(), 0);
  int best = 1 << 30, legal = 0;
  do {
    const int m = brute_makespan(b, perm);
    if (m < 0) continue;
    ++legal;
    best = std::min(best, m);
  } while (std::next_permutation(perm.begin(), perm.end()));
  ASSERT_GT(legal, 1);
  const BasicBlock s = list_schedule_block(b);
  const auto order = order_of(b, s);
  ASSERT_EQ(order.size(), b.body.size());
  EXPECT_EQ(brute_makespan(b, order), best);
  EXPECT_EQ(idealized_makespan(b, build_dep_graph(b), order), best);
  EXPECT_EQ(s.body[0].op, Opcode::Lw);
}

TEST(Schedule, RandomBlocksStayLegal) {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    const Program c = compile(random_workload(seed).program, {.schedule = false});
    for (const auto& b : c.blocks) {
      const BasicBlock s = list_schedule_block(b);
      const auto order = order_of(b, s);
      ASSERT_EQ(order.size(), b.body.size());
      EXPECT_GE(brute_makespan(b, order), 0) << "seed " << seed;
      if (b.ends_in_control()) {
        EXPECT_EQ(s.body.back(), b.body.back());
      }
    }
  }
}

TEST(Compile, GlobalWriteCapSplitsBlocks) {
  std::ostringstream s;
  s << "a:\n";
  for (int r = 1; r <= 12; ++r) s << "  add g" << r << ", g" << r << ", 1\n";
  const Program p = compile(parse_program(s.str()));
  ASSERT_EQ(p.blocks.size(), 2u);
  for (const auto& b : p.blocks) {
    int gw = 0;
    for (const auto& i : b.body) gw += i.dest && i.dest->scope == Scope::Global;
    EXPECT_LE(gw, kMaxGlobalWrites);
  }
}

TEST(Lower, SimpleBlkDropsTheHead) {
  const Program c = compile(make_kernel("simple_blk").program);
  const Program l = lower_for_baseline(c);
  ASSERT_EQ(l.blocks.size(), 1u);
  EXPECT_FALSE(l.has_heads);
  EXPECT_FALSE(l.blocks[0].head.has_value());
  EXPECT_EQ(l.blocks[0].body.size(), 6u);
  EXPECT_EQ(CodeLayout(l).size(), 6u);
}

TEST(Lower, AllGlobalProgramOnlyLosesHeads) {
  const Program c = compile(make_kernel("simple_blk").program);
  const Program l = lower_for_baseline(c);
  for (size_t i = 0; i < c.blocks[0].body.size(); ++i) {
    Instruction a = c.blocks[0].body[i], b = l.blocks[0].body[i];
    EXPECT_EQ(a.op, b.op);
    EXPECT_EQ(a.dest, b.dest);
    EXPECT_EQ(a.src, b.src);
    EXPECT_EQ(a.imm, b.imm);
  }
}

TEST(Lower, NoLocalsRemain) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const Program l = lower_for_baseline(compile(random_workload(seed).program));
    for (const auto& b : l.blocks)
      for (const auto& i : b.body) {
        if (i.dest) {
          EXPECT_EQ(i.dest->scope, Scope::Global);
        }
        for (const auto& s : i.src) {
          if (s) {
            EXPECT_EQ(s->scope, Scope::Global);
          }
        }
      }
  }
}

TEST(Lower, CompiledAndLoweredAgreeWithSource) {
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    const Workload w = random_workload(seed);
    const auto mask = globals_used(w.program);
    const OracleTrace ref = run_oracle(w.program);
    const OracleTrace cg = run_oracle(compile_for(CoreKind::CgOoo, w.program));
    const OracleTrace base = run_oracle(compile_for(CoreKind::Ooo, w.program));
    ASSERT_TRUE(ref.finished);
    EXPECT_TRUE(diff_states(ref.final_state, cg.final_state, mask).empty()) << seed;
    EXPECT_TRUE(diff_states(ref.final_state, base.final_state, mask).empty()) << seed;
    EXPECT_EQ(ref.stores, cg.stores) << seed;
    EXPECT_EQ(ref.instructions, base.instructions) << seed;
  }
}
