#include "cgsim/workloads.hh"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cgsim/assembly.hh"

namespace cgsim {

namespace {

Workload finish(std::string name, std::string description, std::string source,
                std::vector<std::pair<uint64_t, uint64_t>> warm = {}) {
  Workload w;
  w.name = std::move(name);
  w.description = std::move(description);
  w.program = parse_program(source);
  w.source = std::move(source);
  w.warm_ranges = std::move(warm);
  return w;
}

std::string hex(uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

Workload dep_chain(int n) {
  std::ostringstream s;
  s << "; one serial dependence chain per iteration\n"
    << ".reg g7 " << n << "\n"
    << "loop:\n"
    << "  add g2, g2, g1\n"
    << "  add g2, g2, 3\n"
    << "  xor g2, g2, g1\n"
    << "  add g2, g2, 5\n"
    << "  sub g2, g2, g1\n"
    << "  add g2, g2, 7\n"
    << "  add g1, g1, 1\n"
    << "  bne g1, g7, loop\n";
  return finish("dep_chain", "serial ALU dependence chain", s.str());
}

Workload indep_alu(int n) {
  std::ostringstream s;
  s << "; independent ALU work\n"
    << ".reg g7 " << n << "\n"
    << "loop:\n"
    << "  add g2, g2, 1\n"
    << "  add g3, g3, 2\n"
    << "  xor g4, g4, 5\n"
    << "  add g5, g5, 3\n"
    << "  sub g6, g6, 1\n"
    << "  or  g8, g8, 6\n"
    << "  add g1, g1, 1\n"
    << "  bne g1, g7, loop\n";
  return finish("indep_alu", "independent ALU operations", s.str());
}

Workload pointer_chase(int n) {
  const uint64_t base = 0x100000;
  const uint64_t stride = 64;
  // Node i lives at slot (i * 7919) mod n, so the walk jumps around the region.
  auto addr = [&](int i) { return base + stride * ((static_cast<uint64_t>(i) * 7919) % static_cast<uint64_t>(n)); };
  std::ostringstream s;
  s << "; linked-list walk with independent work per node\n"
    << ".reg g1 " << hex(addr(0)) << "\n";
  for (int i = 0; i < n; ++i) {
    s << ".word " << hex(addr(i)) << " " << (i + 1 < n ? hex(addr(i + 1)) : "0") << "\n";
    s << ".word " << hex(addr(i) + 8) << " " << (i * 3 + 1) << "\n";
  }
  s << "loop:\n"
    << "  lw  g2, 8(g1)\n"
    << "  lw  g1, 0(g1)\n"
    << "  add g3, g3, g2\n"
    << "  add g4, g4, 1\n"
    << "  xor g5, g5, g4\n"
    << "  add g6, g6, 3\n"
    << "  or  g8, g8, g4\n"
    << "  sub g9, g9, 1\n"
    << "  bne g1, 0, loop\n";
  return finish("pointer_chase", "pointer chase plus independent work", s.str(),
                {{base, stride * static_cast<uint64_t>(n)}});
}

Workload hoq_stress(int n) {
  const uint64_t base = 0x400000;
  std::ostringstream s;
  s << "; each iteration: a load that misses to memory, one op that waits on it,\n"
    << "; and independent work that queues behind it\n"
    << ".reg g1 " << hex(base) << "\n"
    << ".reg g7 " << hex(base + 64 * static_cast<uint64_t>(n)) << "\n"
    << "loop:\n"
    << "  add g1, g1, 64\n"
    << "  lw  g2, 0(g1)\n"
    << "  add g10, g10, g2\n"
    << "  add g3, g3, 1\n"
    << "  xor g4, g4, 5\n"
    << "  add g5, g5, 3\n"
    << "  sub g6, g6, 1\n"
    << "  add g8, g8, 7\n"
    << "  or  g9, g9, 6\n"
    << "  bne g1, g7, loop\n";
  return finish("hoq_stress", "head-of-queue stressor: load-use stall ahead of independent work", s.str());
}

Workload branchy(int n) {
  std::ostringstream s;
  s << "; data-dependent branch on a pseudo-random bit\n"
    << ".reg g2 12345\n"
    << ".reg g7 " << n << "\n"
    << "loop:\n"
    << "  mul g2, g2, 1103515245\n"
    << "  add g2, g2, 12345\n"
    << "  shr g3, g2, 33\n"
    << "  and g3, g3, 1\n"
    << "  beq g3, 0, skip\n"
    << "  add g4, g4, 1\n"
    << "  xor g5, g5, g2\n"
    << "skip:\n"
    << "  add g1, g1, 1\n"
    << "  bne g1, g7, loop\n";
  return finish("branchy", "loop with an unpredictable branch", s.str());
}

Workload store_load_conflict(int n) {
  const uint64_t base = 0x200000;
  std::ostringstream s;
  s << "; the store address resolves late; the next block loads the same word\n"
    << ".reg g1 " << hex(base) << "\n"
    << ".reg g7 " << hex(base + 8 * static_cast<uint64_t>(n)) << "\n"
    << "loop:\n"
    << "  mul g11, g1, 1\n"
    << "  mul g11, g11, 1\n"
    << "  sw  g2, 0(g11)\n"
    << "load:\n"
    << "  lw  g12, 0(g1)\n"
    << "  add g3, g3, g12\n"
    << "  add g2, g2, 1\n"
    << "  add g1, g1, 8\n"
    << "  bne g1, g7, loop\n";
  return finish("store_load_conflict", "memory-order violation stressor", s.str(),
                {{base, 8 * static_cast<uint64_t>(n)}});
}

Workload simple_blk(int n) {
  const uint64_t src = 0x300000, dst = 0x340000;
  std::ostringstream s;
  s << "; do { p += 8; x = *p; c++; *q = c; q += 8; } while (p != end)\n"
    << ".reg g1 " << hex(src) << "\n"
    << ".reg g2 " << hex(dst) << "\n"
    << ".reg g7 " << hex(src + 8 * static_cast<uint64_t>(n)) << "\n"
    << "loop:\n"
    << "  add g1, g1, 8\n"
    << "  lw  g6, 0(g1)\n"
    << "  add g3, g3, 1\n"
    << "  sw  g3, 0(g2)\n"
    << "  add g2, g2, 8\n"
    << "  bne g1, g7, loop\n";
  return finish("simple_blk", "do-while loop used for the pipeline walkthrough", s.str(),
                {{src, 8 * static_cast<uint64_t>(n) + 64}, {dst, 8 * static_cast<uint64_t>(n) + 64}});
}

Workload hoistable_loads(int n) {
  const uint64_t base = 0x500000;
  std::ostringstream s;
  s << "; the load and its address update sit at the bottom of the block;\n"
    << "; every load touches a new line\n"
    << ".reg g1 " << hex(base) << "\n"
    << ".reg g7 " << hex(base + 64 * static_cast<uint64_t>(n)) << "\n"
    << "loop:\n"
    << "  add g3, g3, 1\n"
    << "  add g4, g4, 2\n"
    << "  xor g5, g5, g3\n"
    << "  add g6, g6, 3\n"
    << "  or  g8, g8, g4\n"
    << "  add g3, g3, 5\n"
    << "  sub g4, g4, 1\n"
    << "  xor g5, g5, g6\n"
    << "  add g6, g6, 7\n"
    << "  add g8, g8, 9\n"
    << "  add g1, g1, 64\n"
    << "  lw  g11, 0(g1)\n"
    << "  add g2, g2, g11\n"
    << "  bne g1, g7, loop\n";
  return finish("hoistable_loads", "loads the list scheduler can hoist", s.str());
}

Workload block8_synth(int n) {
  constexpr int kBlocks = 16;
  constexpr int kRegs[] = {2, 3, 4, 5, 6, 8};
  std::ostringstream s;
  s << "; 16 blocks of 8 instructions, each ending in a never-taken branch\n"
    << ".reg g7 " << n << "\n";
  for (int b = 0; b < kBlocks; ++b) {
    s << (b == 0 ? "loop" : "b" + std::to_string(b)) << ":\n";
    if (b + 1 < kBlocks) {
      for (int k = 0; k < 7; ++k) {
        const int r = kRegs[(b + k) % 6];
        s << "  add g" << r << ", g" << r << ", " << k + 1 << "\n";
      }
      s << "  beq g9, 1, b" << b + 1 << "\n";
    } else {
      for (int r : kRegs) s << "  add g" << r << ", g" << r << ", 1\n";
      s << "  add g1, g1, 1\n"
        << "  bne g1, g7, loop\n";
    }
  }
  return finish("block8_synth", "average block size 8 for predictor access counting", s.str());
}

struct KernelDef {
  const char* name;
  int default_iterations;
  Workload (*make)(int);
};

const KernelDef kKernels[] = {
    {"dep_chain", 2000, dep_chain},
    {"indep_alu", 2000, indep_alu},
    {"pointer_chase", 2000, pointer_chase},
    {"hoq_stress", 2048, hoq_stress},
    {"branchy", 2000, branchy},
    {"store_load_conflict", 1000, store_load_conflict},
    {"simple_blk", 1000, simple_blk},
    {"hoistable_loads", 1000, hoistable_loads},
    {"block8_synth", 200, block8_synth},
};

// Random program builder.
class RandomGen {
 public:
  RandomGen(uint64_t seed, const RandomProgramOptions& o) : rng_(seed), o_(o) {}
  std::string build();

 private:
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::string data_reg() { return "g" + std::to_string(pick(1, 9)); }
  std::string label() { return "L" + std::to_string(next_label_++); }
  int offset() { return 8 * pick(0, o_.memory_words - 1); }
  void op();
  void straight();
  void branch_if();
  void loop(int depth);
  void conflict();
  void segment(int depth);

  std::mt19937_64 rng_;
  RandomProgramOptions o_;
  std::ostringstream s_;
  int next_label_ = 0;
  int functions_ = 0;
  int next_counter_ = 20;
};

void RandomGen::op() {
  static const char* alu[] = {"add", "sub", "mul", "and", "or", "xor", "shl", "shr", "cmp"};
  const int kind = pick(0, 9);
  if (kind <= 5) {
    s_ << "  " << alu[pick(0, 8)] << " " << data_reg() << ", " << data_reg() << ", ";
    if (chance(0.5))
      s_ << data_reg();
    else
      s_ << pick(-8, 40);
    s_ << "\n";
  } else if (kind == 6) {
    if (chance(0.5))
      s_ << "  mov " << data_reg() << ", " << data_reg() << "\n";
    else
      s_ << "  li " << data_reg() << ", " << pick(-100, 1000) << "\n";
  } else if (kind == 7) {
    s_ << "  lw " << data_reg() << ", " << offset() << "(g10)\n";
  } else if (kind == 8) {
    s_ << "  sw " << data_reg() << ", " << offset() << "(g10)\n";
  } else {
    // Load through a computed address inside the region.
    s_ << "  and g12, " << data_reg() << ", " << 8 * (o_.memory_words - 1) << "\n"
       << "  add g12, g12, g10\n"
       << "  lw " << data_reg() << ", 0(g12)\n";
  }
}

void RandomGen::straight() {
  const int n = pick(1, 6);
  for (int i = 0; i < n; ++i) op();
  // A bare label splits the run into a block without a control op.
  if (chance(0.3)) s_ << label() << ":\n";
}

void RandomGen::branch_if() {
  const std::string other = label(), join = label();
  s_ << "  and g11, " << data_reg() << ", " << (1 << pick(0, 4)) << "\n";
  s_ << "  " << (chance(0.5) ? "beq" : "bne") << " g11, 0, " << other << "\n";
  straight();
  if (chance(0.5)) {
    s_ << "  jmp " << join << "\n";
    s_ << other << ":\n";
    straight();
    s_ << join << ":\n";
  } else {
    s_ << other << ":\n";
  }
}

void RandomGen::loop(int depth) {
  if (next_counter_ > 23) {
    straight();
    return;
  }
  const std::string counter = "g" + std::to_string(next_counter_++);
  const std::string head = label();
  s_ << "  li " << counter << ", " << pick(1, 5) << "\n";
  s_ << head << ":\n";
  const int n = pick(1, 2);
  for (int i = 0; i < n; ++i) segment(depth + 1);
  s_ << "  sub " << counter << ", " << counter << ", 1\n";
  s_ << "  bne " << counter << ", 0, " << head << "\n";
  --next_counter_;
}

void RandomGen::conflict() {
  // The store address goes through two multiplies, so it resolves after the
  // load in the next block has already read the same word.
  s_ << "  and g13, " << data_reg() << ", " << 8 * (o_.memory_words - 1) << "\n"
     << "  mul g13, g13, 1\n"
     << "  mul g13, g13, 1\n"
     << "  add g13, g13, g10\n"
     << "  sw " << data_reg() << ", 0(g13)\n";
  s_ << label() << ":\n";
  s_ << "  lw " << data_reg() << ", " << offset() << "(g10)\n";
  s_ << "  add " << data_reg() << ", " << data_reg() << ", 1\n";
}

void RandomGen::segment(int depth) {
  const int kind = pick(0, 9);
  if (kind <= 2) {
    straight();
  } else if (kind <= 4) {
    branch_if();
  } else if (kind <= 6 && depth < 2) {
    loop(depth);
  } else if (kind == 7 && o_.calls) {
    s_ << "  call F" << pick(0, 1) << "\n";
    functions_ = 2;
  } else {
    conflict();
  }
}

std::string RandomGen::build() {
  s_ << "; random program\n";
  for (int r = 1; r <= 9; ++r) s_ << ".reg g" << r << " " << pick(0, 200) << "\n";
  s_ << ".reg g10 " << hex(0x1000) << "\n";
  for (int w = 0; w < o_.memory_words; ++w)
    if (chance(0.7)) s_ << ".word " << hex(0x1000 + 8 * static_cast<uint64_t>(w)) << " " << pick(0, 500) << "\n";
  s_ << "main:\n";
  const int n = pick(o_.min_segments, o_.max_segments);
  for (int i = 0; i < n; ++i) segment(0);
  // Returning to a block index past the end leaves the program.
  s_ << "  li g63, 1000000\n"
     << "  ret\n";
  for (int f = 0; f < functions_; ++f) {
    s_ << "F" << f << ":\n";
    const int k = pick(1, 5);
    for (int i = 0; i < k; ++i) op();
    s_ << "  ret\n";
  }
  return s_.str();
}

}  // namespace

const std::vector<std::string>& kernel_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : kKernels) v.emplace_back(k.name);
    return v;
  }();
  return names;
}

Workload make_kernel(const std::string& name, int iterations) {
  for (const auto& k : kKernels)
    if (name == k.name) return k.make(iterations > 0 ? iterations : k.default_iterations);
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

Workload issue_model_kernel() {
  const std::string src =
      "; 2 waits on the load in 1; 3 is independent; 4 waits on 2\n"
      ".reg g1 0x600000\n"
      "  head\n"
      "  lw  r1, 0(g1)\n"
      "  add r2, r1, g2\n"
      "  add r3, g3, g4\n"
      "  add r4, r2, g5\n";
  return finish("issue_model", "Skipahead issue example", src, {{0x600000, 64}});
}

Workload random_workload(uint64_t seed, const RandomProgramOptions& opts) {
  RandomGen g(seed, opts);
  return finish("random_" + std::to_string(seed), "random program", g.build(), {{0x1000, 8 * static_cast<uint64_t>(opts.memory_words)}});
}

}  // namespace cgsim
