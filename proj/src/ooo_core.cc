// Cycle-level superscalar out-of-order baseline: unified issue window with
// oldest-first select, ROB, merged physical register file and per-instruction
// branch checkpoints. Same stage timing as the CG-OoO core: rename in c+2,
// first issue in c+4.

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

#include "cgsim/bpu.hh"
#include "cgsim/cache.hh"
#include "cgsim/core.hh"
#include "cgsim/lsu.hh"
#include "cgsim/rename.hh"
#include "core_common.hh"

namespace cgsim {

namespace {

struct Entry {
  FetchedInst f;
  int src_phys[2] = {-1, -1};
  int dest_phys = -1;
  int prev_phys = -1;
  uint64_t eligible = 0;
  bool in_window = true;
  bool issued = false;
  bool completed = false;
  uint64_t complete_cycle = 0;
  uint64_t actual_next = 0;
};

struct PendingSquash {
  SquashKind kind;
  uint64_t target_sn;
  uint64_t restart_pc;
  uint64_t source_sn;
  bool taken = false;
};

class OooCore {
 public:
  OooCore(const Program& p, const CoreConfig& cfg, const RunOptions& opts);
  RunStats run();

 private:
  Entry* find(uint64_t sn);
  bool ready(int phys, uint64_t now) const { return phys < 0 || rt_.ready_cycle[phys] <= now; }
  void writeback(uint64_t now);
  void commit(uint64_t now);
  void issue(uint64_t now);
  void execute(Entry& e, uint64_t now);
  void rename(uint64_t now);
  void apply_squash(uint64_t now);

  const Program& prog_;
  const CoreConfig& cfg_;
  const RunOptions& opts_;
  CodeLayout layout_;
  EnergyLedger ledger_;
  CommonUnits cu_;
  EnergyLedger::UnitId rename_map_, free_list_, window_, window_cam_row_, prf_, rob_unit_;
  Bpu bpu_;
  RenameTable rt_;
  Lsu lsu_;
  CacheHierarchy cache_;
  std::map<uint64_t, uint64_t> memory_;
  RunStats s_;
  InstFrontEnd fe_;

  std::deque<Entry> rob_;
  int window_count_ = 0;
  std::multimap<uint64_t, uint64_t> completions_;
  std::vector<PendingSquash> pending_;
  uint64_t cam_this_cycle_ = 0;
  bool done_ = false;
  uint64_t last_progress_ = 0;
};

OooCore::OooCore(const Program& p, const CoreConfig& cfg, const RunOptions& opts)
    : prog_(p),
      cfg_(cfg),
      opts_(opts),
      layout_(p),
      bpu_(cfg),
      rt_(cfg.ooo_regs, 1),
      lsu_(cfg.lq_entries, cfg.sq_entries),
      cache_(cfg),
      fe_(p, layout_, cfg, bpu_, ledger_, cu_, cfg.ooo_depth, s_, opts) {
  if (p.has_heads) throw ProgramError("baseline cores take programs without heads");
  cu_.register_all(ledger_, cfg);
  const EnergyParams& e = cfg.energy;
  const auto w = static_cast<uint32_t>(cfg.ooo_issue_width);
  const auto phys_bits = static_cast<uint32_t>(log2_ceil(static_cast<uint64_t>(cfg.ooo_regs)));
  const TableDesc rat{kArchGlobals, phys_bits, 2 * w, w};
  const TableDesc fl{static_cast<uint32_t>(cfg.ooo_regs), phys_bits, w, w};
  const TableDesc win{static_cast<uint32_t>(cfg.ooo_window), 192, w, w};
  const TableDesc prf{static_cast<uint32_t>(cfg.ooo_regs), 64, 2 * w, w};
  const TableDesc rob{static_cast<uint32_t>(cfg.ooo_rob), 96, w, w};
  rename_map_ = ledger_.register_unit("rename_map", access_energy(rat, e), table_leakage(rat, e),
                                      EnergyCategory::Rename);
  free_list_ = ledger_.register_unit("free_list", access_energy(fl, e), table_leakage(fl, e),
                                     EnergyCategory::Rename);
  window_ = ledger_.register_unit("issue_window", access_energy(win, e), table_leakage(win, e),
                                  EnergyCategory::Issue);
  window_cam_row_ = ledger_.register_unit("window_cam_row", cam_search_energy(2, phys_bits, e), 0,
                                          EnergyCategory::Issue);
  prf_ = ledger_.register_unit("prf", access_energy(prf, e), table_leakage(prf, e),
                               EnergyCategory::RegisterFile);
  rob_unit_ = ledger_.register_unit("rob", access_energy(rob, e), table_leakage(rob, e),
                                    EnergyCategory::Commit);
  warm_caches(cache_, opts);
  for (const auto& [r, v] : p.init_regs) rt_.value[r] = v;
  for (const auto& [a, v] : p.init_memory)
    if (v) memory_[a] = v;
}

Entry* OooCore::find(uint64_t sn) {
  auto it = std::lower_bound(rob_.begin(), rob_.end(), sn,
                             [](const Entry& e, uint64_t v) { return e.f.sn < v; });
  if (it == rob_.end() || it->f.sn != sn) return nullptr;
  return &*it;
}

void OooCore::writeback(uint64_t now) {
  while (!completions_.empty() && completions_.begin()->first <= now) {
    const uint64_t sn = completions_.begin()->second;
    completions_.erase(completions_.begin());
    Entry* e = find(sn);
    if (!e) continue;
    e->completed = true;
    e->complete_cycle = now;
    ledger_.charge(rob_unit_);
    emit(opts_, now, "complete", sn, e->f.inst->seq_id, e->f.pc);
  }
}

void OooCore::commit(uint64_t now) {
  for (int n = 0; n < cfg_.ooo_issue_width && !rob_.empty() && !done_; ++n) {
    Entry& e = rob_.front();
    if (!e.completed || e.complete_cycle >= now) break;
    const Instruction& inst = *e.f.inst;
    if (e.dest_phys >= 0) rt_.commit(inst.dest->index, static_cast<uint16_t>(e.dest_phys));
    if (inst.op == Opcode::Sw) {
      for (const auto& st : lsu_.commit_through(e.f.sn)) {
        if (st.value)
          memory_[st.addr] = st.value;
        else
          memory_.erase(st.addr);
        cu_.charge_cache(ledger_, cache_.access(st.addr).level);
        if (opts_.on_store_drain) opts_.on_store_drain(st);
      }
    } else if (inst.op == Opcode::Lw) {
      lsu_.commit_through(e.f.sn);
    }
    fe_.retire_through(e.f.sn);
    ledger_.charge(rob_unit_);
    ++s_.instructions;
    last_progress_ = now;
    emit(opts_, now, "commit", e.f.sn, inst.seq_id, e.f.pc);
    if (e.actual_next == CodeLayout::kExitPc) done_ = true;
    rob_.pop_front();
  }
}

void OooCore::execute(Entry& e, uint64_t now) {
  const Instruction& inst = *e.f.inst;
  const uint64_t a = e.src_phys[0] >= 0 ? rt_.value[e.src_phys[0]] : 0;
  const uint64_t b = inst.src[1] ? (e.src_phys[1] >= 0 ? rt_.value[e.src_phys[1]] : 0)
                                 : static_cast<uint64_t>(inst.imm.value_or(0));
  int lat = inst.latency();
  uint64_t result = 0;
  e.actual_next = fe_.norm(e.f.pc + 1);
  cu_.charge_eu(ledger_, inst.op);
  for (int k = 0; k < 2; ++k)
    if (e.src_phys[k] >= 0) ledger_.charge(prf_);

  switch (inst.op) {
    case Opcode::Lw: {
      const uint64_t addr = effective_address(a, inst.imm.value_or(0));
      ledger_.charge(cu_.sq_row, lsu_.stores_in_flight());
      const auto r = lsu_.execute_load({e.f.sn, 0}, addr, memory_);
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
      ledger_.charge(cu_.lq_row, lsu_.loads_in_flight());
      if (auto victim = lsu_.execute_store({e.f.sn, 0}, addr, b)) {
        const Entry* v = find(victim->sn);
        pending_.push_back({SquashKind::Memory, victim->sn, v ? v->f.pc : 0, e.f.sn});
      }
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
        e.actual_next = layout_.block_pc_or_exit(a);
      else if (taken)
        e.actual_next = layout_.block_pc(static_cast<size_t>(inst.target));
      if (inst.op == Opcode::Call) result = e.f.block + 1;
      bpu_.update(e.f.pc, ctrl_kind(inst.op), taken, taken ? e.actual_next : 0, e.f.history);
      ledger_.charge(cu_.bpu_update);
      if (e.actual_next != e.f.predicted_next) {
        bpu_.count_misprediction();
        PendingSquash ps{SquashKind::Control, e.f.sn + 1, e.actual_next, e.f.sn};
        ps.taken = taken;
        pending_.push_back(ps);
      }
      break;
    }
    case Opcode::Nop:
      break;
    default:
      result = alu_result(inst.op, a, b);
      break;
  }

  e.issued = true;
  e.in_window = false;
  --window_count_;
  ++s_.issued;
  if (e.dest_phys >= 0) {
    rt_.value[e.dest_phys] = result;
    rt_.ready_cycle[e.dest_phys] = now + lat;
    ledger_.charge(prf_);
    const auto rows = static_cast<uint64_t>(cfg_.ooo_window);
    ledger_.charge(window_cam_row_, rows);
    cam_this_cycle_ += rows;
    ledger_.charge(cu_.wire_inter);
  }
  completions_.insert({now + lat + 1, e.f.sn});
  emit(opts_, now, "issue", e.f.sn, inst.seq_id, e.f.pc);
}

void OooCore::issue(uint64_t now) {
  int n = 0;
  for (auto& e : rob_) {
    if (n >= cfg_.ooo_issue_width) break;
    if (!e.in_window || e.eligible > now) continue;
    if (!ready(e.src_phys[0], now) || !ready(e.src_phys[1], now)) continue;
    ledger_.charge(window_);
    execute(e, now);
    ++n;
  }
}

void OooCore::rename(uint64_t now) {
  for (int n = 0; n < cfg_.fetch_width && !fe_.queue.empty(); ++n) {
    const FetchedInst& f = fe_.queue.front();
    if (f.fetch_cycle + 2 > now) break;
    if (static_cast<int>(rob_.size()) >= cfg_.ooo_rob || window_count_ >= cfg_.ooo_window) break;
    const Instruction& inst = *f.inst;
    const bool ld = inst.op == Opcode::Lw, st = inst.op == Opcode::Sw;
    if ((ld || st) && !lsu_.can_allocate(ld ? 1 : 0, st ? 1 : 0)) break;
    if (inst.dest && !rt_.has_free()) {
      ++rt_.stats.stalls;
      break;
    }
    Entry e;
    e.f = f;
    for (int k = 0; k < 2; ++k) {
      if (!inst.src[k]) continue;
      if (inst.src[k]->scope != Scope::Global) throw ProgramError("baseline program uses a local register");
      e.src_phys[k] = rt_.lookup(inst.src[k]->index);
      ++rt_.stats.map_reads;
      ledger_.charge(rename_map_);
    }
    if (inst.dest) {
      const auto m = rt_.rename(inst.dest->index, 0);
      e.dest_phys = m->first;
      e.prev_phys = m->second;
      ledger_.charge(rename_map_);
      ledger_.charge(free_list_);
    }
    if (ld || st) {
      lsu_.allocate({f.sn, 0}, st);
      ledger_.charge(st ? cu_.sq_write : cu_.lq_write);
    }
    e.eligible = now + 2;
    ledger_.charge(cu_.decode);
    ledger_.charge(cu_.fetch_queue);
    ledger_.charge(window_);
    ledger_.charge(rob_unit_);
    emit(opts_, now, "rename", f.sn, inst.seq_id, f.pc);
    rob_.push_back(e);
    ++window_count_;
    fe_.queue.pop_front();
  }
}

void OooCore::apply_squash(uint64_t now) {
  if (pending_.empty()) return;
  PendingSquash sq = pending_.front();
  for (const auto& p : pending_)
    if (p.target_sn < sq.target_sn) sq = p;
  pending_.clear();
  if (sq.kind == SquashKind::Control && !find(sq.source_sn)) return;
  if (sq.kind == SquashKind::Memory && !find(sq.target_sn)) return;

  if (sq.kind == SquashKind::Control) {
    Entry* src = find(sq.source_sn);
    fe_.recover_control(src->f, sq.taken);
    src->f.predicted_next = sq.restart_pc;
    ++s_.control_squashes;
  } else {
    fe_.recover_memory(sq.target_sn);
    ++s_.memory_squashes;
  }
  uint64_t dropped = 0;
  while (!rob_.empty() && rob_.back().f.sn >= sq.target_sn) {
    Entry& e = rob_.back();
    if (e.dest_phys >= 0)
      rt_.undo(e.f.inst->dest->index, static_cast<uint16_t>(e.dest_phys), static_cast<uint16_t>(e.prev_phys));
    if (e.in_window) --window_count_;
    ++s_.squashed_instructions;
    ++dropped;
    rob_.pop_back();
  }
  s_.flush_depth.add(dropped);
  lsu_.squash_from({sq.target_sn, 0});
  fe_.redirect(sq.restart_pc, now + 1 + static_cast<uint64_t>(cfg_.ooo_depth - kFrontEndStages));
  emit(opts_, now, "squash", sq.target_sn, -1, sq.restart_pc, -1,
       sq.kind == SquashKind::Control ? "control" : "memory");
}

RunStats OooCore::run() {
  s_.core = "ooo";
  for (uint64_t now = 1; now <= opts_.max_cycles; ++now) {
    cam_this_cycle_ = 0;
    writeback(now);
    commit(now);
    if (done_) {
      ledger_.tick();
      break;
    }
    issue(now);
    fe_.fetch(now);
    rename(now);
    apply_squash(now);
    s_.cam_compares += cam_this_cycle_;
    s_.max_cam_compares_per_cycle = std::max(s_.max_cam_compares_per_cycle, cam_this_cycle_);
    ledger_.tick();
    if (now - last_progress_ > 2'000'000) throw std::logic_error("OoO core made no progress");
  }
  s_.finished = done_;
  s_.cycles = ledger_.cycles();
  s_.blocks = 0;
  s_.ipc = s_.cycles ? static_cast<double>(s_.instructions) / static_cast<double>(s_.cycles) : 0.0;
  s_.bpu = bpu_.stats;
  s_.rename = rt_.stats;
  s_.lsu = lsu_.stats;
  s_.cache = collect_cache_stats(cache_);
  for (int r = 0; r < kArchGlobals; ++r) s_.final_state.regs[r] = rt_.value[rt_.committed(static_cast<uint8_t>(r))];
  s_.final_state.memory = memory_;
  fill_energy(s_, ledger_);
  return s_;
}

}  // namespace

RunStats run_ooo(const Program& p, const CoreConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (p.blocks.empty()) {
    RunStats s;
    s.core = "ooo";
    s.finished = true;
    s.final_state = initial_state(p);
    return s;
  }
  OooCore core(p, cfg, opts);
  return core.run();
}

}  // namespace cgsim
