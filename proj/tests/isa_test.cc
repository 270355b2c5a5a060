#include <gtest/gtest.h>

#include <sstream>

#include "cgsim/assembly.hh"
#include "cgsim/compiler.hh"
#include "cgsim/interpreter.hh"
#include "cgsim/workloads.hh"

using namespace cgsim;

namespace {

const char* kSimpleBlk = R"(
.reg g1 0x1000
.reg g2 0x2000
.reg g7 0x1018
loop:
  head
  add g1, g1, 8
  lw  g6, 0(g1)
  add g3, g3, 1
  sw  g3, 0(g2)
  add g2, g2, 8
  bne g1, g7, loop
)";

std::string straight_adds(int n, const std::string& tail = "") {
  std::ostringstream s;
  s << "start:\n";
  for (int i = 0; i < n; ++i) s << "  add g2, g2, " << i + 1 << "\n";
  s << tail;
  return s.str();
}

int count_lines_starting(const std::string& text, const std::string& word) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (ls >> first && first == word) ++n;
  }
  return n;
}

}  // namespace

TEST(Assembly, SimpleBlkIsOneBlockOfSix) {
  const Program p = parse_program(kSimpleBlk);
  ASSERT_EQ(p.blocks.size(), 1u);
  EXPECT_TRUE(p.has_heads);
  EXPECT_EQ(p.blocks[0].meta.blk_size, 6u);
  EXPECT_TRUE(p.blocks[0].meta.has_ctrl);
  EXPECT_EQ(p.blocks[0].meta.ctrl_offset, 6u);
  EXPECT_EQ(p.blocks[0].meta.fall_through_offset, 7u);
  EXPECT_EQ(p.init_regs.at(1), 0x1000u);
}

TEST(Assembly, EmptyBlockIsAnError) {
  try {
    parse_program("a:\n head\nb:\n head\n add g1, g1, 1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("empty block"), std::string::npos);
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(Assembly, FortyAddsPartitionIntoThirtyTwoAndEight) {
  const Program p = parse_program(straight_adds(40));
  ASSERT_EQ(p.blocks.size(), 2u);
  EXPECT_EQ(p.blocks[0].body.size(), 32u);
  EXPECT_EQ(p.blocks[1].body.size(), 8u);
}

TEST(Assembly, RejectsMalformedInput) {
  EXPECT_THROW(parse_program("  frob g1, g2, g3\n"), ParseError);
  EXPECT_THROW(parse_program("  add g1, g2\n"), ParseError);
  EXPECT_THROW(parse_program("  add g64, g1, g2\n"), ParseError);
  EXPECT_THROW(parse_program("  bne g1, g2, nowhere\n"), ParseError);
  EXPECT_THROW(parse_program("x:\n  add g1, g1, 1\nx:\n  add g1, g1, 1\n"), ParseError);
}

TEST(Assembly, RoundTripSimpleBlk) {
  const Program p = parse_program(kSimpleBlk);
  EXPECT_EQ(parse_program(emit_program(p)), p);
}

TEST(Assembly, RoundTripCompiledKernelsAndRandomPrograms) {
  for (const auto& k : kernel_names()) {
    const Program c = compile(make_kernel(k, 4).program);
    EXPECT_EQ(parse_program(emit_program(c)), c) << k;
  }
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    const Program src = random_workload(seed).program;
    EXPECT_EQ(parse_program(emit_program(src)), src) << seed;
    const Program c = compile(src);
    EXPECT_EQ(parse_program(emit_program(c)), c) << seed;
  }
}

TEST(Assembly, EmitsOneHeadPerBlock) {
  const Program p = compile(parse_program("a:\n  add g1, g1, 1\n  bne g1, g2, a\nb:\n  add g3, g3, 1\n"));
  ASSERT_EQ(p.blocks.size(), 2u);
  EXPECT_EQ(count_lines_starting(emit_program(p), "head"), 2);
}

TEST(Assembly, EmittedHasCtrlBitForBne) {
  const std::string text = emit_program(parse_program(kSimpleBlk));
  EXPECT_NE(text.find("has_ctrl=1"), std::string::npos);
  const std::string flat = emit_program(compile(parse_program(straight_adds(3))));
  EXPECT_NE(flat.find("has_ctrl=0"), std::string::npos);
}

TEST(Isa, HeadMetaFromBody) {
  BasicBlock b;
  Instruction add;
  add.op = Opcode::Add;
  add.dest = RegisterRef::global(1);
  add.src[0] = RegisterRef::global(1);
  add.imm = 1;
  b.body = {add, add, add};
  HeadMeta m = compute_head_meta(b);
  EXPECT_FALSE(m.has_ctrl);
  EXPECT_EQ(m.blk_size, 3u);
  EXPECT_EQ(m.fall_through_offset, 4u);
  Instruction br;
  br.op = Opcode::Bne;
  br.src[0] = RegisterRef::global(1);
  br.src[1] = RegisterRef::global(2);
  br.target = 0;
  b.body.push_back(br);
  m = compute_head_meta(b);
  EXPECT_TRUE(m.has_ctrl);
  EXPECT_EQ(m.ctrl_offset, 4u);
  EXPECT_EQ(m.fall_through_offset, 5u);
}

TEST(Isa, CodeLayoutCountsHeadSlots) {
  const Program p = compile(parse_program("a:\n  add g1, g1, 1\n  add g1, g1, 1\n  bne g1, g2, a\nb:\n  add g3, g3, 1\n"));
  const CodeLayout l(p);
  ASSERT_EQ(l.num_blocks(), 2u);
  EXPECT_EQ(l.block_pc(0), 0u);
  EXPECT_EQ(l.block_pc(1), 4u);
  EXPECT_EQ(l.size(), 6u);
  EXPECT_EQ(l.slot(4).offset, -1);
  EXPECT_EQ(l.slot(5).block, 1u);
  EXPECT_EQ(l.body_pc(0, 2), 3u);
  // The control op sits ctrl_offset slots after its head.
  EXPECT_EQ(l.block_pc(0) + p.blocks[0].meta.ctrl_offset, l.body_pc(0, 2));
  EXPECT_EQ(l.block_pc(0) + p.blocks[0].meta.fall_through_offset, l.block_pc(1));
  EXPECT_EQ(l.block_pc_or_exit(2), CodeLayout::kExitPc);

  const CodeLayout flat(lower_for_baseline(p));
  EXPECT_EQ(flat.block_pc(1), 3u);
  EXPECT_EQ(flat.size(), 4u);
}

TEST(Isa, Semantics) {
  EXPECT_EQ(alu_result(Opcode::Sub, 3, 5), static_cast<uint64_t>(-2));
  EXPECT_EQ(alu_result(Opcode::Shl, 1, 65), 2u);
  EXPECT_EQ(alu_result(Opcode::Xor, 6, 3), 5u);
  EXPECT_TRUE(branch_taken(Opcode::Blt, static_cast<uint64_t>(-1), 0));
  EXPECT_FALSE(branch_taken(Opcode::Beq, 1, 2));
  EXPECT_TRUE(branch_taken(Opcode::Jmp, 0, 0));
  EXPECT_EQ(effective_address(0x1005, 8), 0x1008u);
}

TEST(Isa, ValidateRejectsOversizedBlocks) {
  Program p = parse_program(straight_adds(3));
  for (int i = 0; i < 40; ++i) p.blocks[0].body.push_back(p.blocks[0].body[0]);
  EXPECT_THROW(validate_program(p), ProgramError);
}

TEST(Interpreter, SimpleBlkFinalState) {
  const OracleTrace t = run_oracle(parse_program(kSimpleBlk));
  ASSERT_TRUE(t.finished);
  EXPECT_EQ(t.path.size(), 3u);
  EXPECT_EQ(t.instructions, 18u);
  EXPECT_EQ(t.final_state.regs[1], 0x1018u);
  EXPECT_EQ(t.final_state.regs[3], 3u);
  ASSERT_EQ(t.stores.size(), 3u);
  EXPECT_EQ(t.stores[2].addr, 0x2010u);
  EXPECT_EQ(t.stores[2].value, 3u);
}
