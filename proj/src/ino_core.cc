// Cycle-level in-order baseline: fetch in c, decode into the issue queue in
// c+1, in-order issue with stall-on-use from c+2. Results are written in
// order (a younger write may not land before an older one to the same
// register) and stores wait in the store queue until they retire.

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <stdexcept>

#include "cgsim/bpu.hh"
#include "cgsim/cache.hh"
#include "cgsim/core.hh"
#include "cgsim/lsu.hh"
#include "core_common.hh"

namespace cgsim {

namespace {

struct Slot {
  FetchedInst f;
  uint64_t decode_cycle = 0;
  uint64_t complete_cycle = kNever;
  uint64_t actual_next = 0;
};

class InoCore {
 public:
  InoCore(const Program& p, const CoreConfig& cfg, const RunOptions& opts);
  RunStats run();

 private:
  void retire(uint64_t now);
  void issue(uint64_t now);
  // Returns true when the op was a mispredicted control op.
  bool execute(Slot& s, uint64_t now);
  void decode(uint64_t now);

  const Program& prog_;
  const CoreConfig& cfg_;
  const RunOptions& opts_;
  CodeLayout layout_;
  EnergyLedger ledger_;
  CommonUnits cu_;
  EnergyLedger::UnitId iq_, rf_, scoreboard_, inflight_;
  Bpu bpu_;
  Lsu lsu_;
  CacheHierarchy cache_;
  std::map<uint64_t, uint64_t> memory_;
  RunStats s_;
  InstFrontEnd fe_;

  std::array<uint64_t, kArchGlobals> regs_{};
  std::array<uint64_t, kArchGlobals> ready_{};
  std::deque<Slot> iq_slots_;
  std::deque<Slot> inflight_slots_;
  bool done_ = false;
  uint64_t last_progress_ = 0;
};

InoCore::InoCore(const Program& p, const CoreConfig& cfg, const RunOptions& opts)
    : prog_(p),
      cfg_(cfg),
      opts_(opts),
      layout_(p),
      bpu_(cfg),
      lsu_(cfg.lq_entries, cfg.sq_entries),
      cache_(cfg),
      fe_(p, layout_, cfg, bpu_, ledger_, cu_, cfg.ino_depth, s_, opts) {
  if (p.has_heads) throw ProgramError("baseline cores take programs without heads");
  cu_.register_all(ledger_, cfg);
  const EnergyParams& e = cfg.energy;
  const auto w = static_cast<uint32_t>(cfg.ino_issue_width);
  const TableDesc iq{static_cast<uint32_t>(cfg.ino_iq), 64, w, w};
  const TableDesc rf{static_cast<uint32_t>(cfg.ino_regs), 64, 2 * w, w};
  const TableDesc sb{kArchGlobals, 8, 2 * w, w};
  const TableDesc inflight{16, 64, w, w};
  iq_ = ledger_.register_unit("iq", access_energy(iq, e), table_leakage(iq, e), EnergyCategory::Issue);
  scoreboard_ = ledger_.register_unit("scoreboard", access_energy(sb, e), table_leakage(sb, e),
                                      EnergyCategory::Issue);
  rf_ = ledger_.register_unit("rf", access_energy(rf, e), table_leakage(rf, e), EnergyCategory::RegisterFile);
  inflight_ = ledger_.register_unit("inflight", access_energy(inflight, e), table_leakage(inflight, e),
                                    EnergyCategory::Commit);
  warm_caches(cache_, opts);
  for (const auto& [r, v] : p.init_regs) regs_[r] = v;
  for (const auto& [a, v] : p.init_memory)
    if (v) memory_[a] = v;
}

void InoCore::retire(uint64_t now) {
  for (int n = 0; n < cfg_.ino_issue_width && !inflight_slots_.empty() && !done_; ++n) {
    Slot& s = inflight_slots_.front();
    if (s.complete_cycle >= now) break;
    const Opcode op = s.f.inst->op;
    if (is_memory(op)) {
      for (const auto& st : lsu_.commit_through(s.f.sn)) {
        if (st.value)
          memory_[st.addr] = st.value;
        else
          memory_.erase(st.addr);
        cu_.charge_cache(ledger_, cache_.access(st.addr).level);
        if (opts_.on_store_drain) opts_.on_store_drain(st);
      }
    }
    fe_.retire_through(s.f.sn);
    ledger_.charge(inflight_);
    ++s_.instructions;
    last_progress_ = now;
    emit(opts_, now, "commit", s.f.sn, s.f.inst->seq_id, s.f.pc);
    if (s.actual_next == CodeLayout::kExitPc) done_ = true;
    inflight_slots_.pop_front();
  }
}

bool InoCore::execute(Slot& s, uint64_t now) {
  const Instruction& inst = *s.f.inst;
  const uint64_t a = inst.src[0] ? regs_[inst.src[0]->index] : 0;
  const uint64_t b = inst.src[1] ? regs_[inst.src[1]->index] : static_cast<uint64_t>(inst.imm.value_or(0));
  int lat = inst.latency();
  uint64_t result = 0;
  bool mispredicted = false;
  s.actual_next = fe_.norm(s.f.pc + 1);
  cu_.charge_eu(ledger_, inst.op);
  ledger_.charge(rf_, static_cast<uint64_t>(inst.num_sources()));

  switch (inst.op) {
    case Opcode::Lw: {
      const uint64_t addr = effective_address(a, inst.imm.value_or(0));
      ledger_.charge(cu_.sq_row, lsu_.stores_in_flight());
      const auto r = lsu_.execute_load({s.f.sn, 0}, addr, memory_);
      result = r.value;
      if (r.forwarded) {
        lat = cfg_.l1_latency;
      } else {
        const auto acc = cache_.access(addr);
        lat = acc.latency;
        cu_.charge_cache(ledger_, acc.level);
      }
      break;
    }
    case Opcode::Sw: {
      const uint64_t addr = effective_address(a, inst.imm.value_or(0));
      // Loads never run ahead of older stores here, so no conflict is possible.
      lsu_.execute_store({s.f.sn, 0}, addr, b);
      break;
    }
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt:
    case Opcode::Jmp:
    case Opcode::Call:
    case Opcode::Ret: {
      const bool taken = branch_taken(inst.op, a, b);
      if (inst.op == Opcode::Ret)
        s.actual_next = layout_.block_pc_or_exit(a);
      else if (taken)
        s.actual_next = layout_.block_pc(static_cast<size_t>(inst.target));
      if (inst.op == Opcode::Call) result = s.f.block + 1;
      bpu_.update(s.f.pc, ctrl_kind(inst.op), taken, taken ? s.actual_next : 0, s.f.history);
      ledger_.charge(cu_.bpu_update);
      if (s.actual_next != s.f.predicted_next) {
        bpu_.count_misprediction();
        fe_.recover_control(s.f, taken);
        mispredicted = true;
      }
      break;
    }
    case Opcode::Nop:
      break;
    default:
      result = alu_result(inst.op, a, b);
      break;
  }
  if (inst.dest) {
    regs_[inst.dest->index] = result;
    ready_[inst.dest->index] = now + lat;
    ledger_.charge(rf_);
    ledger_.charge(scoreboard_);
    ledger_.charge(cu_.wire_intra);
  }
  s.complete_cycle = now + lat + 1;
  ++s_.issued;
  emit(opts_, now, "issue", s.f.sn, inst.seq_id, s.f.pc);
  return mispredicted;
}

void InoCore::issue(uint64_t now) {
  for (int n = 0; n < cfg_.ino_issue_width && !iq_slots_.empty(); ++n) {
    Slot& s = iq_slots_.front();
    if (s.decode_cycle + 1 > now) break;
    const Instruction& inst = *s.f.inst;
    ledger_.charge(scoreboard_);
    bool ok = true;
    for (const auto& r : inst.src)
      if (r && ready_[r->index] > now) ok = false;
    if (inst.dest && ready_[inst.dest->index] > now + static_cast<uint64_t>(inst.latency())) ok = false;
    if (!ok) break;
    ledger_.charge(iq_);
    Slot done = s;
    iq_slots_.pop_front();
    const bool squash = execute(done, now);
    inflight_slots_.push_back(done);
    if (squash) {
      s_.squashed_instructions += iq_slots_.size() + fe_.queue.size();
      s_.flush_depth.add(iq_slots_.size() + fe_.queue.size());
      lsu_.squash_from({done.f.sn + 1, 0});
      iq_slots_.clear();
      ++s_.control_squashes;
      fe_.redirect(done.actual_next, now + 1 + static_cast<uint64_t>(cfg_.ino_depth - kFrontEndStages));
      emit(opts_, now, "squash", done.f.sn + 1, -1, done.actual_next, -1, "control");
      break;
    }
  }
}

void InoCore::decode(uint64_t now) {
  for (int n = 0; n < cfg_.fetch_width && !fe_.queue.empty(); ++n) {
    const FetchedInst& f = fe_.queue.front();
    if (f.fetch_cycle + 1 > now || static_cast<int>(iq_slots_.size()) >= cfg_.ino_iq) break;
    const Instruction& inst = *f.inst;
    const bool ld = inst.op == Opcode::Lw, st = inst.op == Opcode::Sw;
    if ((ld || st) && !lsu_.can_allocate(ld ? 1 : 0, st ? 1 : 0)) break;
    for (const auto& r : inst.src)
      if (r && r->scope != Scope::Global) throw ProgramError("baseline program uses a local register");
    if (ld || st) {
      lsu_.allocate({f.sn, 0}, st);
      ledger_.charge(st ? cu_.sq_write : cu_.lq_write);
    }
    ledger_.charge(cu_.decode);
    ledger_.charge(cu_.fetch_queue);
    ledger_.charge(iq_);
    ledger_.charge(inflight_);
    iq_slots_.push_back(Slot{f, now});
    fe_.queue.pop_front();
  }
}

RunStats InoCore::run() {
  s_.core = "ino";
  for (uint64_t now = 1; now <= opts_.max_cycles; ++now) {
    retire(now);
    if (done_) {
      ledger_.tick();
      break;
    }
    issue(now);
    fe_.fetch(now);
    decode(now);
    ledger_.tick();
    if (now - last_progress_ > 2'000'000) throw std::logic_error("InO core made no progress");
  }
  s_.finished = done_;
  s_.cycles = ledger_.cycles();
  s_.ipc = s_.cycles ? static_cast<double>(s_.instructions) / static_cast<double>(s_.cycles) : 0.0;
  s_.bpu = bpu_.stats;
  s_.lsu = lsu_.stats;
  s_.cache = collect_cache_stats(cache_);
  s_.final_state.regs = regs_;
  s_.final_state.memory = memory_;
  fill_energy(s_, ledger_);
  return s_;
}

}  // namespace

RunStats run_ino(const Program& p, const CoreConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (p.blocks.empty()) {
    RunStats s;
    s.core = "ino";
    s.finished = true;
    s.final_state = initial_state(p);
    return s;
  }
  InoCore core(p, cfg, opts);
  return core.run();
}

}  // namespace cgsim
