// Pieces shared by the three timing cores.

#ifndef CGSIM_CORE_COMMON_HH
#define CGSIM_CORE_COMMON_HH

#include <cstdint>
#include <deque>
#include <string>

#include "cgsim/bpu.hh"
#include "cgsim/cache.hh"
#include "cgsim/config.hh"
#include "cgsim/core.hh"
#include "cgsim/energy.hh"
#include "cgsim/isa.hh"

namespace cgsim {

inline constexpr uint64_t kNever = ~uint64_t{0};
inline constexpr uint64_t kFetchLineSlots = 16;  // 64-byte line of 4-byte slots
// Stages between fetch and the first issue opportunity on the wide cores.
inline constexpr int kFrontEndStages = 7;

struct CommonUnits {
  EnergyLedger::UnitId icache, bpu, bpu_update, ras, fetch_queue, decode, latch;
  EnergyLedger::UnitId eu_alu, eu_mul, eu_agu, eu_branch;
  EnergyLedger::UnitId lq_write, lq_row, sq_write, sq_row;
  EnergyLedger::UnitId l1, l2, l3, dram;
  EnergyLedger::UnitId wire_intra, wire_inter;

  void register_all(EnergyLedger& l, const CoreConfig& cfg);
  void charge_eu(EnergyLedger& l, Opcode op) const;
  void charge_cache(EnergyLedger& l, int level) const;
};

int log2_ceil(uint64_t v);

// Ends a fetch group after `pc` when the next slot starts a new line.
inline bool line_boundary_after(uint64_t pc) { return (pc + 1) % kFetchLineSlots == 0; }

void warm_caches(CacheHierarchy& c, const RunOptions& opts);
CacheStats collect_cache_stats(const CacheHierarchy& c);

inline void emit(const RunOptions& o, uint64_t cycle, const char* ev, uint64_t sn, int64_t seq,
                 uint64_t pc, int bw = -1, std::string detail = {}) {
  if (o.trace) o.trace(TraceEvent{cycle, ev, sn, seq, pc, bw, std::move(detail)});
}

// One fetched instruction of a baseline core. Sequence numbers are handed
// out at fetch and never reused.
struct FetchedInst {
  uint64_t sn = 0;
  uint64_t pc = 0;
  const Instruction* inst = nullptr;
  uint32_t block = 0;
  uint64_t fetch_cycle = 0;
  uint64_t predicted_next = 0;
  uint32_t history = 0;  // predictor history used by a control op
};

// Instruction-granular front end with a prediction per control op and one
// predictor access per fetch group.
class InstFrontEnd {
 public:
  InstFrontEnd(const Program& p, const CodeLayout& layout, const CoreConfig& cfg, Bpu& bpu,
               EnergyLedger& ledger, const CommonUnits& cu, int depth, RunStats& stats,
               const RunOptions& opts);

  void fetch(uint64_t now);
  // Flushes everything fetched and restarts at `pc` from cycle `resume`.
  void redirect(uint64_t pc, uint64_t resume);

  // Predictor recovery for a squash of every instruction at or after
  // `target`. `branch` is the mispredicted op for a control squash.
  void recover_control(const FetchedInst& branch, bool taken);
  void recover_memory(uint64_t target);
  void retire_through(uint64_t sn);

  uint64_t norm(uint64_t pc) const { return pc >= layout_.size() ? CodeLayout::kExitPc : pc; }
  uint64_t return_pc(uint32_t block) const { return norm(layout_.end_pc(block)); }

  std::deque<FetchedInst> queue;

 private:
  struct Record {
    uint64_t sn;
    BpuCheckpoint cp;
  };
  void drop_records_from(uint64_t sn);

  const Program& prog_;
  const CodeLayout& layout_;
  const CoreConfig& cfg_;
  Bpu& bpu_;
  EnergyLedger& ledger_;
  const CommonUnits& cu_;
  int depth_;
  RunStats& s_;
  const RunOptions& opts_;
  uint64_t pc_ = 0;
  uint64_t resume_ = 1;
  uint64_t next_sn_ = 0;
  std::deque<Record> records_;
};

}  // namespace cgsim

#endif  // CGSIM_CORE_COMMON_HH
