// Entry points of the three timing cores and the hooks they expose.

#ifndef CGSIM_CORE_HH
#define CGSIM_CORE_HH

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cgsim/bpu.hh"
#include "cgsim/config.hh"
#include "cgsim/isa.hh"
#include "cgsim/lsu.hh"
#include "cgsim/stats.hh"

namespace cgsim {

struct TraceEvent {
  uint64_t cycle = 0;
  const char* event = "";  // fetch, predict, rename, arrive, issue, complete, commit, squash, bw_free, refetch
  uint64_t sn = 0;         // block sequence number (CG-OoO) or instruction number
  int64_t seq_id = -1;     // static instruction id, -1 when not applicable
  uint64_t pc = 0;
  int bw = -1;
  std::string detail;
};

std::string trace_json(const TraceEvent& e);

enum class SquashKind { Control, Memory };

// State handed to the squash observer right after a squash was applied
// (CG-OoO only).
struct SquashAudit {
  SquashKind kind = SquashKind::Control;
  uint64_t cycle = 0;
  uint64_t target_sn = 0;
  uint64_t restart_pc = 0;
  uint64_t committed_blocks = 0;
  std::vector<uint32_t> live_blocks;  // static block index of every BROB entry, oldest first
  std::vector<uint64_t> live_sns;
  std::vector<uint64_t> live_next_pcs;  // predicted (or resolved) successor of each live block
  BpuCheckpoint bpu_state;
  std::array<uint16_t, kArchGlobals> spec_map{};
  std::array<uint16_t, kArchGlobals> committed_map{};
  // (arch, phys) global writes of the live blocks, oldest first.
  std::vector<std::pair<uint8_t, uint16_t>> live_writes;
  std::optional<OrderKey> lsu_youngest;
  std::vector<uint64_t> busy_bw_sns;
  bool rename_consistent = false;
};

struct RunOptions {
  uint64_t max_cycles = 20'000'000;
  // Byte ranges preloaded into every cache level before the run.
  std::vector<std::pair<uint64_t, uint64_t>> warm_ranges;
  std::function<void(const TraceEvent&)> trace;
  std::function<void(const SquashAudit&)> on_squash;
  std::function<void(const StoreRecord&)> on_store_drain;
};

RunStats run_cgooo(const Program& p, const CoreConfig& cfg, const RunOptions& opts = {});
RunStats run_ooo(const Program& p, const CoreConfig& cfg, const RunOptions& opts = {});
RunStats run_ino(const Program& p, const CoreConfig& cfg, const RunOptions& opts = {});

}  // namespace cgsim

#endif  // CGSIM_CORE_HH
