// Block-level compiler: partitioning, local/global register classification,
// per-block list scheduling and head insertion.

#ifndef CGSIM_COMPILER_HH
#define CGSIM_COMPILER_HH

#include <bitset>
#include <vector>

#include "cgsim/isa.hh"

namespace cgsim {

// Splits blocks longer than `max_size`. Branch targets are renumbered; only
// the last fragment keeps the control op.
Program partition_blocks(const Program& p, int max_size = kMaxBlockSize);

struct Liveness {
  std::vector<std::bitset<kArchGlobals>> live_in;
  std::vector<std::bitset<kArchGlobals>> live_out;
};

// Global-register liveness. Every register is live at program exit and after
// a `ret`, so the final architectural state is preserved.
Liveness compute_liveness(const Program& p);

// Rewrites register operands: a definition stays Global when it is the last
// write of its register in the block and the register is live out; every
// other value becomes a Local with its own LRF index. Locals beyond
// `max_locals` are spilled back to their Global name, least-used first.
// Source-level locals are first renamed to unused globals.
Program classify_registers(const Program& p, int max_locals = kLrfSize);

struct DepGraph {
  enum class Kind : uint8_t { Raw, War, Waw, Mem, Ctrl };
  struct Edge {
    int from;
    int to;
    Kind kind;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<int>> preds;
  std::vector<std::vector<int>> succs;
  std::vector<int> priority;  // critical-path height in cycles
};

DepGraph build_dep_graph(const BasicBlock& b);

BasicBlock list_schedule_block(const BasicBlock& b);

// Single-issue completion time of `order` (a permutation of body indices):
// each op issues one cycle after the previous one at the earliest, RAW
// consumers wait for the producer latency, other edges for one cycle.
int idealized_makespan(const BasicBlock& b, const DepGraph& g, const std::vector<int>& order);

struct CompileOptions {
  bool schedule = true;
  int max_locals = kLrfSize;
  int max_global_writes = kMaxGlobalWrites;
};

// Full pipeline producing a block-form program with heads.
Program compile(const Program& source, const CompileOptions& opts = {});

// Strips heads and renames locals into globals unused by the program.
// Throws ProgramError when there are not enough free globals.
Program lower_for_baseline(const Program& p);

}  // namespace cgsim

#endif  // CGSIM_COMPILER_HH
