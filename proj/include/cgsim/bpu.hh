// Hybrid branch predictor: gshare + bimodal with a meta chooser, a
// set-associative BTB and a return address stack.

#ifndef CGSIM_BPU_HH
#define CGSIM_BPU_HH

#include <cstdint>
#include <optional>
#include <vector>

#include "cgsim/config.hh"
#include "cgsim/isa.hh"

namespace cgsim {

struct RasState {
  std::vector<uint64_t> entries;  // circular
  uint32_t top = 0;               // index of the next free slot
  uint32_t count = 0;

  friend bool operator==(const RasState&, const RasState&) = default;
};

// Speculative front-end state taken before a prediction.
struct BpuCheckpoint {
  uint32_t history = 0;
  RasState ras;

  friend bool operator==(const BpuCheckpoint&, const BpuCheckpoint&) = default;
};

struct BpuPrediction {
  bool taken = false;
  std::optional<uint64_t> target;  // empty: taken but target unknown
  BpuCheckpoint before;
};

struct BpuStats {
  uint64_t lookups = 0;       // direction/target table lookups
  uint64_t updates = 0;
  uint64_t btb_hits = 0;
  uint64_t btb_misses = 0;
  uint64_t mispredictions = 0;
};

class Bpu {
 public:
  explicit Bpu(const CoreConfig& cfg);

  // Predicts the control op identified by `pc` (the head PC in block form,
  // the branch PC otherwise). `return_pc` is pushed on the RAS by calls.
  BpuPrediction predict(uint64_t pc, CtrlKind kind, uint64_t return_pc);

  // Trains the tables with a resolved outcome. `history` is the history the
  // prediction used.
  void update(uint64_t pc, CtrlKind kind, bool taken, uint64_t target, uint32_t history);

  // Restores speculative state after a squash. With `resolved` set the
  // checkpointed op is replayed with its actual outcome.
  struct Resolved {
    CtrlKind kind;
    bool taken;
    uint64_t return_pc;
  };
  void restore(const BpuCheckpoint& cp, std::optional<Resolved> resolved);

  BpuCheckpoint checkpoint() const { return {history_, ras_}; }
  uint32_t history() const { return history_; }
  const RasState& ras() const { return ras_; }
  uint32_t history_mask() const { return history_mask_; }

  // Direction-only query used by tests; does not touch any state.
  bool direction(uint64_t pc) const;

  BpuStats stats;
  void count_misprediction() { ++stats.mispredictions; }

  // Applies the effect of one predicted/resolved op on history and RAS.
  static void advance(uint32_t& history, RasState& ras, uint32_t mask, CtrlKind kind, bool taken,
                      uint64_t return_pc);
  static std::optional<uint64_t> ras_top(const RasState& ras);

 private:
  static void bump(uint8_t& c, bool up);
  std::optional<uint64_t> btb_lookup(uint64_t pc);
  void btb_insert(uint64_t pc, uint64_t target);

  uint32_t index_mask_;
  uint32_t history_mask_;
  std::vector<uint8_t> gshare_, bimodal_, meta_;
  uint32_t history_ = 0;
  RasState ras_;

  struct BtbEntry {
    bool valid = false;
    uint16_t tag = 0;
    uint64_t target = 0;
    uint64_t lru = 0;
  };
  uint32_t btb_sets_;
  uint32_t btb_ways_;
  uint32_t btb_index_bits_;
  std::vector<BtbEntry> btb_;
  uint64_t btb_clock_ = 0;
};

}  // namespace cgsim

#endif  // CGSIM_BPU_HH
