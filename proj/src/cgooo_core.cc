// Cycle-level CG-OoO core.
//
// Stage timing for an instruction fetched in cycle c: rename/allocate in
// c+2 (heads look up the BPU here), arrival in the Block Window IQ in c+3,
// Head Buffer fill at the end of the arrival cycle, issue from c+4. An op
// issued in t with latency L wakes dependents in t+L, completes in t+L+1 and
// its block may commit from t+L+2.

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <stdexcept>
#include <string>

#include "cgsim/block_window.hh"
#include "cgsim/bpu.hh"
#include "cgsim/cache.hh"
#include "cgsim/core.hh"
#include "cgsim/lsu.hh"
#include "cgsim/rename.hh"
#include "core_common.hh"

namespace cgsim {

namespace {

struct FeItem {
  uint64_t pc;
  uint32_t block;
  int32_t offset;  // -1 for the head
  uint64_t fetch_cycle;
  uint64_t fsn;    // fetch-side block instance number
};

struct FeBlock {
  uint64_t fsn;
  uint64_t head_pc;
  bool predicted = false;
  uint64_t next_pc = 0;
  bool passed_end = false;  // fetch ran past the block end assuming fall-through
};

struct Src {
  enum Kind : uint8_t { None, Zero, Local, Global } kind = None;
  int producer = -1;  // op index inside the block for Local
  uint16_t phys = 0;  // for Global
};

struct Op {
  const Instruction* inst = nullptr;
  uint32_t index = 0;
  uint64_t pc = 0;
  Src src[2];
  int dest_phys = -1;
  uint64_t arrive = 0;
  bool issued = false;
  uint64_t issue_cycle = 0;
  uint64_t ready = kNever;  // local result availability
  uint64_t value = 0;
  bool completed = false;
};

struct Block {
  uint64_t sn = 0;
  uint32_t block = 0;
  uint64_t head_pc = 0;
  int bw = -1;
  int cluster = 0;
  uint32_t size = 0;
  uint32_t renamed = 0;
  uint32_t issued = 0;
  uint32_t remaining = 0;
  uint64_t last_complete = 0;
  std::vector<Op> ops;
  std::array<int, kLrfSize> local_producer{};
  struct Undo {
    uint8_t arch;
    uint16_t phys;
    uint16_t prev;
  };
  std::vector<Undo> renames;
  BpuCheckpoint checkpoint;
  CtrlKind kind = CtrlKind::None;
  uint64_t predicted_next = 0;
  bool resolved = false;
  uint64_t actual_next = 0;
  std::deque<int> iq;
  std::vector<int> hb;
};

struct BwState {
  bool busy = false;
  uint64_t sn = 0;
  uint64_t free_from = 0;
};

struct PendingSquash {
  SquashKind kind;
  uint64_t target_sn;
  uint64_t restart_pc;
  uint64_t source_sn;
  bool taken = false;      // control only
  uint32_t victim_op = 0;  // memory only: position of the violating load
};

struct Completion {
  uint64_t cycle;
  uint64_t sn;
  uint32_t index;
};

class CgCore {
 public:
  CgCore(const Program& p, const CoreConfig& cfg, const RunOptions& opts);
  RunStats run();

 private:
  // Units specific to this core.
  struct Units {
    EnergyLedger::UnitId rename_map, free_list, bw_iq, hb, hb_cam_row, lrf, grf, brob;
  };

  uint64_t norm(uint64_t pc) const { return pc >= layout_.size() ? CodeLayout::kExitPc : pc; }
  bool is_head_pc(uint64_t pc) const {
    return pc < layout_.size() && layout_.slot(pc).offset == -1;
  }
  Block* find_block(uint64_t sn);
  bool src_ready(const Block& b, const Src& s, uint64_t now) const;
  uint64_t src_value(const Block& b, const Src& s) const;

  void writeback(uint64_t now);
  void commit(uint64_t now);
  void issue(uint64_t now);
  void execute(Block& b, Op& op, uint64_t now);
  void fill_head_buffers(uint64_t now);
  void rename(uint64_t now);
  bool rename_head(const FeItem& it, uint64_t now);
  bool rename_body(const FeItem& it, uint64_t now);
  void fetch(uint64_t now);
  void apply_squash(uint64_t now);
  void frontend_redirect(uint64_t after_fsn, uint64_t pc, uint64_t now);

  const Program& prog_;
  const CoreConfig& cfg_;
  const RunOptions& opts_;
  CodeLayout layout_;

  EnergyLedger ledger_;
  CommonUnits cu_;
  Units u_;

  Bpu bpu_;
  RenameTable rt_;
  Lsu lsu_;
  CacheHierarchy cache_;
  std::map<uint64_t, uint64_t> memory_;

  // Front end.
  uint64_t fetch_pc_ = 0;
  uint64_t fetch_resume_ = 1;
  bool drain_wait_ = false;
  uint64_t next_fsn_ = 0;
  std::deque<FeItem> feq_;
  std::deque<FeBlock> fe_blocks_;

  // Back end.
  std::deque<Block> brob_;
  uint64_t next_sn_ = 0;
  std::vector<BwState> bws_;
  int bw_rr_ = 0;
  std::multimap<uint64_t, Completion> completions_;
  std::vector<PendingSquash> pending_;
  uint64_t cam_this_cycle_ = 0;

  bool done_ = false;
  uint64_t last_progress_ = 0;
  RunStats s_;
};

CgCore::CgCore(const Program& p, const CoreConfig& cfg, const RunOptions& opts)
    : prog_(p),
      cfg_(cfg),
      opts_(opts),
      layout_(p),
      bpu_(cfg),
      rt_(cfg.grf_regs, cfg.grf_segments),
      lsu_(cfg.lq_entries, cfg.sq_entries),
      cache_(cfg) {
  if (!p.has_heads) throw ProgramError("CG-OoO core needs a program with heads");
  cu_.register_all(ledger_, cfg);
  const EnergyParams& e = cfg.energy;
  const auto w = static_cast<uint32_t>(cfg.fetch_width);
  const auto nbw = static_cast<uint32_t>(cfg.total_bws());
  const auto phys_bits = static_cast<uint32_t>(log2_ceil(static_cast<uint64_t>(cfg.grf_regs)));
  const TableDesc rat{kArchGlobals, phys_bits, 2 * w, w};
  const TableDesc fl{static_cast<uint32_t>(cfg.grf_regs), phys_bits, 1, 1};
  const TableDesc iq{static_cast<uint32_t>(cfg.bw_iq_size), 64, 1, 1};
  const TableDesc hb{static_cast<uint32_t>(cfg.hb_size), 192, 1, 1};
  const TableDesc lrf{static_cast<uint32_t>(cfg.lrf_size), 64, 2, 2};
  const TableDesc grf{static_cast<uint32_t>(cfg.grf_regs), 64, 8, 4};
  const TableDesc brob{static_cast<uint32_t>(cfg.brob_entries), 128, 1, 1};
  u_.rename_map = ledger_.register_unit("rename_map", access_energy(rat, e), table_leakage(rat, e),
                                        EnergyCategory::Rename);
  u_.free_list = ledger_.register_unit("free_list", access_energy(fl, e), table_leakage(fl, e),
                                       EnergyCategory::Rename);
  u_.bw_iq = ledger_.register_unit("bw_iq", access_energy(iq, e), nbw * table_leakage(iq, e),
                                   EnergyCategory::Issue);
  u_.hb = ledger_.register_unit("head_buffer", access_energy(hb, e), nbw * table_leakage(hb, e),
                                EnergyCategory::Issue);
  u_.hb_cam_row = ledger_.register_unit("hb_cam_row", cam_search_energy(1, phys_bits + 1, e), 0,
                                        EnergyCategory::Issue);
  u_.lrf = ledger_.register_unit("lrf", access_energy(lrf, e), nbw * table_leakage(lrf, e),
                                 EnergyCategory::RegisterFile);
  u_.grf = ledger_.register_unit(
      "grf_segment", segment_access_energy(grf, static_cast<uint32_t>(cfg.grf_segments), e),
      table_leakage(grf, e), EnergyCategory::RegisterFile);
  u_.brob = ledger_.register_unit("brob", access_energy(brob, e), table_leakage(brob, e),
                                  EnergyCategory::Commit);

  bws_.assign(static_cast<size_t>(cfg.total_bws()), BwState{});
  warm_caches(cache_, opts);
  for (const auto& [r, v] : p.init_regs) rt_.value[r] = v;
  for (const auto& [a, v] : p.init_memory)
    if (v) memory_[a] = v;
  fetch_pc_ = layout_.num_blocks() ? layout_.block_pc(0) : CodeLayout::kExitPc;
}

Block* CgCore::find_block(uint64_t sn) {
  auto it = std::lower_bound(brob_.begin(), brob_.end(), sn,
                             [](const Block& b, uint64_t v) { return b.sn < v; });
  if (it == brob_.end() || it->sn != sn) return nullptr;
  return &*it;
}

bool CgCore::src_ready(const Block& b, const Src& s, uint64_t now) const {
  switch (s.kind) {
    case Src::None:
    case Src::Zero:
      return true;
    case Src::Local: {
      const Op& p = b.ops[s.producer];
      return p.issued && p.ready <= now;
    }
    case Src::Global: {
      const uint64_t r = rt_.ready_cycle[s.phys];
      if (r == kNever) return false;
      const int pc = rt_.producer_cluster[s.phys];
      const uint64_t delay =
          (pc >= 0 && pc != b.cluster) ? static_cast<uint64_t>(cfg_.inter_cluster_delay) : 0;
      return r + delay <= now;
    }
  }
  return false;
}

uint64_t CgCore::src_value(const Block& b, const Src& s) const {
  switch (s.kind) {
    case Src::Local: return b.ops[s.producer].value;
    case Src::Global: return rt_.value[s.phys];
    default: return 0;
  }
}

void CgCore::writeback(uint64_t now) {
  while (!completions_.empty() && completions_.begin()->first <= now) {
    const Completion c = completions_.begin()->second;
    completions_.erase(completions_.begin());
    Block* b = find_block(c.sn);
    if (!b) continue;  // squashed while in flight
    Op& op = b->ops[c.index];
    op.completed = true;
    --b->remaining;
    b->last_complete = now;
    ledger_.charge(u_.brob);
    emit(opts_, now, "complete", b->sn, op.inst->seq_id, op.pc, b->bw);
  }
}

void CgCore::commit(uint64_t now) {
  for (int n = 0; n < cfg_.commit_blocks && !brob_.empty() && !done_; ++n) {
    Block& b = brob_.front();
    if (b.renamed != b.size || b.remaining != 0 || b.last_complete >= now) break;
    for (const auto& r : b.renames) rt_.commit(r.arch, r.phys);
    for (const auto& st : lsu_.commit_through(b.sn)) {
      if (st.value)
        memory_[st.addr] = st.value;
      else
        memory_.erase(st.addr);
      cu_.charge_cache(ledger_, cache_.access(st.addr).level);
      if (opts_.on_store_drain) opts_.on_store_drain(st);
    }
    ledger_.charge(u_.brob);
    if (b.bw >= 0 && bws_[b.bw].busy && bws_[b.bw].sn == b.sn) {
      bws_[b.bw].busy = false;
      bws_[b.bw].free_from = now;
    }
    s_.instructions += b.size;
    ++s_.blocks;
    last_progress_ = now;
    emit(opts_, now, "commit", b.sn, prog_.blocks[b.block].head->seq_id, b.head_pc, b.bw);
    if (b.actual_next == CodeLayout::kExitPc) done_ = true;
    brob_.pop_front();
  }
}

void CgCore::execute(Block& b, Op& op, uint64_t now) {
  const Instruction& inst = *op.inst;
  const uint64_t a = src_value(b, op.src[0]);
  const uint64_t bv = inst.src[1] ? src_value(b, op.src[1]) : static_cast<uint64_t>(inst.imm.value_or(0));
  int lat = inst.latency();
  uint64_t result = 0;
  bool writes = inst.dest.has_value();
  cu_.charge_eu(ledger_, inst.op);

  switch (inst.op) {
    case Opcode::Lw: {
      const uint64_t addr = effective_address(a, inst.imm.value_or(0));
      ledger_.charge(cu_.sq_row, lsu_.stores_in_flight());
      const auto r = lsu_.execute_load({b.sn, op.index}, addr, memory_);
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
      if (auto victim = lsu_.execute_store({b.sn, op.index}, addr, bv)) {
        Block* vb = find_block(victim->sn);
        pending_.push_back({SquashKind::Memory, victim->sn, vb ? vb->head_pc : 0, b.sn, false, victim->seq});
      }
      break;
    }
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt:
    case Opcode::Jmp:
    case Opcode::Call:
    case Opcode::Ret: {
      const bool taken = branch_taken(inst.op, a, bv);
      uint64_t next;
      if (inst.op == Opcode::Ret)
        next = layout_.block_pc_or_exit(a);
      else if (taken)
        next = layout_.block_pc(static_cast<size_t>(inst.target));
      else
        next = norm(layout_.end_pc(b.block));
      if (inst.op == Opcode::Call) result = b.block + 1;
      b.resolved = true;
      b.actual_next = next;
      const uint64_t target = taken ? next : 0;
      bpu_.update(b.head_pc, b.kind, taken, target, b.checkpoint.history);
      ledger_.charge(cu_.bpu_update);
      if (next != b.predicted_next) {
        bpu_.count_misprediction();
        PendingSquash ps{SquashKind::Control, b.sn + 1, next, b.sn};
        ps.taken = taken;
        pending_.push_back(ps);
      }
      break;
    }
    case Opcode::Nop:
      writes = false;
      break;
    default:
      result = alu_result(inst.op, a, bv);
      break;
  }

  op.issued = true;
  op.issue_cycle = now;
  ++b.issued;
  ++s_.issued;
  if (writes) {
    if (op.dest_phys >= 0) {
      rt_.value[op.dest_phys] = result;
      rt_.ready_cycle[op.dest_phys] = now + lat;
      rt_.producer_cluster[op.dest_phys] = b.cluster;
      ledger_.charge(u_.grf);
      const uint64_t rows = static_cast<uint64_t>(cfg_.total_bws()) * cfg_.hb_size;
      ledger_.charge(u_.hb_cam_row, rows);
      cam_this_cycle_ += rows;
      ledger_.charge(cu_.wire_intra);
      if (cfg_.clusters > 1) ledger_.charge(cu_.wire_inter, static_cast<uint64_t>(cfg_.clusters - 1));
    } else {
      op.value = result;
      op.ready = now + lat;
      ledger_.charge(u_.lrf);
      ledger_.charge(u_.hb_cam_row, static_cast<uint64_t>(cfg_.hb_size));
      cam_this_cycle_ += static_cast<uint64_t>(cfg_.hb_size);
      ledger_.charge(cu_.wire_intra);
    }
  }
  completions_.insert({now + lat + 1, Completion{now + lat + 1, b.sn, op.index}});
  emit(opts_, now, "issue", b.sn, inst.seq_id, op.pc, b.bw);
}

void CgCore::issue(uint64_t now) {
  struct Nomination {
    Block* block;
    size_t hb_pos;
  };
  std::vector<std::vector<Nomination>> per_cluster(static_cast<size_t>(cfg_.clusters));
  for (auto& b : brob_) {
    if (b.bw < 0 || b.hb.empty()) continue;
    std::vector<HbSlot> slots;
    slots.reserve(b.hb.size());
    for (int idx : b.hb) {
      const Op& op = b.ops[idx];
      slots.push_back({op.inst, src_ready(b, op.src[0], now) && src_ready(b, op.src[1], now)});
    }
    if (auto pick = skipahead_select(slots)) per_cluster[b.cluster].push_back({&b, *pick});
  }
  for (auto& noms : per_cluster) {
    // brob_ is ordered by sn, so nominations are already oldest block first.
    const size_t grants = std::min(noms.size(), static_cast<size_t>(cfg_.eus_per_cluster));
    for (size_t g = 0; g < grants; ++g) {
      Block& b = *noms[g].block;
      const int idx = b.hb[noms[g].hb_pos];
      b.hb.erase(b.hb.begin() + static_cast<long>(noms[g].hb_pos));
      ledger_.charge(u_.hb);
      execute(b, b.ops[idx], now);
      if (b.issued == b.size && b.bw >= 0) {
        bws_[b.bw].busy = false;
        bws_[b.bw].free_from = now + 1;
        emit(opts_, now + 1, "bw_free", b.sn, -1, b.head_pc, b.bw);
      }
    }
  }
}

void CgCore::fill_head_buffers(uint64_t now) {
  for (auto& b : brob_) {
    while (!b.iq.empty() && static_cast<int>(b.hb.size()) < cfg_.hb_size) {
      Op& op = b.ops[b.iq.front()];
      if (op.arrive > now) break;
      b.hb.push_back(b.iq.front());
      b.iq.pop_front();
      ledger_.charge(u_.bw_iq);
      ledger_.charge(u_.hb);
      for (const auto& s : op.src) {
        if (s.kind == Src::Local && src_ready(b, s, now)) ledger_.charge(u_.lrf);
        if (s.kind == Src::Global && src_ready(b, s, now)) ledger_.charge(u_.grf);
      }
    }
  }
}

bool CgCore::rename_head(const FeItem& it, uint64_t now) {
  if (static_cast<int>(brob_.size()) >= cfg_.brob_entries) return false;
  const int nbw = cfg_.total_bws();
  int bw = -1;
  for (int k = 0; k < nbw; ++k) {
    const int cand = (bw_rr_ + k) % nbw;
    if (!bws_[cand].busy && bws_[cand].free_from <= now) {
      bw = cand;
      break;
    }
  }
  if (bw < 0) return false;
  bw_rr_ = (bw + 1) % nbw;

  const BasicBlock& sb = prog_.blocks[it.block];
  Block b;
  b.sn = next_sn_++;
  b.block = it.block;
  b.head_pc = it.pc;
  b.bw = bw;
  b.cluster = bw % cfg_.clusters;
  b.size = sb.meta.blk_size;
  b.remaining = b.size;
  b.ops.resize(b.size);
  b.local_producer.fill(-1);
  b.checkpoint = bpu_.checkpoint();
  b.kind = sb.meta.has_ctrl ? ctrl_kind(sb.body.back().op) : CtrlKind::None;

  const uint64_t fall_through = norm(it.pc + sb.meta.fall_through_offset);
  uint64_t next = fall_through;
  b.actual_next = fall_through;
  if (sb.meta.has_ctrl) {
    const auto pred = bpu_.predict(it.pc, b.kind, fall_through);
    ledger_.charge(cu_.bpu);
    if (b.kind == CtrlKind::Call || b.kind == CtrlKind::Return) ledger_.charge(cu_.ras);
    ++s_.bpu_lookups;
    if (pred.taken) {
      if (pred.target && (is_head_pc(*pred.target) || *pred.target == CodeLayout::kExitPc))
        next = *pred.target;
      else
        next = fall_through;  // unknown target: assume the adjacent block
    }
  }
  b.predicted_next = next;
  bws_[bw].busy = true;
  bws_[bw].sn = b.sn;
  ledger_.charge(u_.brob);
  emit(opts_, now, "rename", b.sn, sb.head->seq_id, it.pc, bw);
  emit(opts_, now, "predict", b.sn, sb.head->seq_id, it.pc, bw, std::to_string(next));
  brob_.push_back(std::move(b));

  // Hand the prediction to fetch. A block that fetch already left is done
  // with its entry; a wrong fall-through guess refetches from the target.
  for (auto fb = fe_blocks_.begin(); fb != fe_blocks_.end(); ++fb) {
    if (fb->fsn != it.fsn) continue;
    if (!fb->passed_end) {
      fb->predicted = true;
      fb->next_pc = next;
    } else {
      fe_blocks_.erase(fb);
      if (next != fall_through) frontend_redirect(it.fsn, next, now);
    }
    break;
  }
  return true;
}

bool CgCore::rename_body(const FeItem& it, uint64_t now) {
  if (brob_.empty()) throw std::logic_error("body instruction without an allocated block");
  Block& b = brob_.back();
  const Instruction& inst = prog_.blocks[it.block].body[static_cast<size_t>(it.offset)];
  if (static_cast<int>(b.iq.size()) >= cfg_.bw_iq_size) return false;
  const bool ld = inst.op == Opcode::Lw, st = inst.op == Opcode::Sw;
  if ((ld || st) && !lsu_.can_allocate(ld ? 1 : 0, st ? 1 : 0)) return false;
  const bool global_dest = inst.dest && inst.dest->scope == Scope::Global;
  if (global_dest && !rt_.has_free()) {
    ++rt_.stats.stalls;
    return false;
  }

  Op& op = b.ops[static_cast<size_t>(it.offset)];
  op.inst = &inst;
  op.index = static_cast<uint32_t>(it.offset);
  op.pc = it.pc;
  for (int k = 0; k < 2; ++k) {
    if (!inst.src[k]) continue;
    const RegisterRef r = *inst.src[k];
    if (r.scope == Scope::Local) {
      ++rt_.stats.local_skipped;
      const int p = b.local_producer[r.index];
      op.src[k] = p < 0 ? Src{Src::Zero, -1, 0} : Src{Src::Local, p, 0};
    } else {
      ++rt_.stats.map_reads;
      ledger_.charge(u_.rename_map);
      op.src[k] = Src{Src::Global, -1, rt_.lookup(r.index)};
    }
  }
  if (inst.dest) {
    if (global_dest) {
      const int seg = b.bw * rt_.segments() / cfg_.total_bws();
      const auto m = rt_.rename(inst.dest->index, seg);
      ledger_.charge(u_.rename_map);
      ledger_.charge(u_.free_list);
      op.dest_phys = m->first;
      b.renames.push_back({inst.dest->index, m->first, m->second});
    } else {
      ++rt_.stats.local_skipped;
      b.local_producer[inst.dest->index] = static_cast<int>(op.index);
    }
  }
  if (ld || st) {
    lsu_.allocate({b.sn, op.index}, st);
    ledger_.charge(st ? cu_.sq_write : cu_.lq_write);
  }
  op.arrive = now + 1;
  b.iq.push_back(static_cast<int>(op.index));
  ++b.renamed;
  emit(opts_, now, "rename", b.sn, inst.seq_id, it.pc, b.bw);
  emit(opts_, now + 1, "arrive", b.sn, inst.seq_id, it.pc, b.bw);
  return true;
}

void CgCore::rename(uint64_t now) {
  int n = 0;
  bool allocated = false;
  while (n < cfg_.fetch_width && !feq_.empty()) {
    const FeItem it = feq_.front();
    if (it.fetch_cycle + 2 > now) break;
    if (it.offset < 0 && allocated) break;  // one block allocation per cycle
    allocated = allocated || it.offset < 0;
    const bool ok = it.offset < 0 ? rename_head(it, now) : rename_body(it, now);
    if (!ok) break;
    ledger_.charge(cu_.decode);
    ledger_.charge(cu_.fetch_queue);
    // rename_head may have flushed younger fetch-queue entries; the head
    // itself is still at the front.
    feq_.pop_front();
    ++n;
  }
}

void CgCore::frontend_redirect(uint64_t after_fsn, uint64_t pc, uint64_t now) {
  while (!feq_.empty() && feq_.back().fsn > after_fsn) feq_.pop_back();
  while (!fe_blocks_.empty() && fe_blocks_.back().fsn > after_fsn) fe_blocks_.pop_back();
  fetch_pc_ = pc;
  fetch_resume_ = std::max(fetch_resume_, now + 1);
  ++s_.frontend_refetches;
  emit(opts_, now, "refetch", 0, -1, pc);
}

void CgCore::fetch(uint64_t now) {
  if (drain_wait_) {
    if (!brob_.empty()) {
      ++s_.fetch_stall_cycles;
      return;
    }
    drain_wait_ = false;
  }
  if (now < fetch_resume_ || fetch_pc_ == CodeLayout::kExitPc) {
    ++s_.fetch_stall_cycles;
    return;
  }
  if (static_cast<int>(feq_.size()) + cfg_.fetch_width > cfg_.fetch_queue) {
    ++s_.fetch_stall_cycles;
    return;
  }
  int n = 0;
  while (n < cfg_.fetch_width && fetch_pc_ != CodeLayout::kExitPc) {
    const uint64_t pc = fetch_pc_;
    const auto slot = layout_.slot(pc);
    if (slot.offset < 0) {
      if (static_cast<int>(fe_blocks_.size()) >= cfg_.bpc_buffer) break;
      fe_blocks_.push_back(FeBlock{next_fsn_++, pc});
    }
    feq_.push_back(FeItem{pc, slot.block, slot.offset, now, fe_blocks_.back().fsn});
    ++n;
    ledger_.charge(cu_.latch, static_cast<uint64_t>(cfg_.cg_depth));
    ledger_.charge(cu_.fetch_queue);
    emit(opts_, now, "fetch", fe_blocks_.back().fsn, slot.offset < 0
                                                         ? prog_.blocks[slot.block].head->seq_id
                                                         : prog_.blocks[slot.block].body[slot.offset].seq_id,
         pc);

    const bool block_end = pc + 1 == layout_.end_pc(slot.block);
    uint64_t next = pc + 1;
    if (block_end) {
      FeBlock& fb = fe_blocks_.back();
      if (fb.predicted) {
        next = fb.next_pc;
        fe_blocks_.pop_back();
      } else {
        fb.passed_end = true;
        next = norm(pc + 1);
      }
    }
    fetch_pc_ = norm(next);
    if (next != pc + 1 || line_boundary_after(pc)) break;
  }
  if (n > 0) {
    ++s_.fetch_groups;
    s_.fetched_slots += static_cast<uint64_t>(n);
    ledger_.charge(cu_.icache);
  } else {
    ++s_.fetch_stall_cycles;
  }
}

void CgCore::apply_squash(uint64_t now) {
  if (pending_.empty()) return;
  PendingSquash sq = pending_.front();
  for (const auto& p : pending_)
    if (p.target_sn < sq.target_sn ||
        (p.target_sn == sq.target_sn && p.kind == SquashKind::Control && sq.kind != SquashKind::Control))
      sq = p;
  pending_.clear();

  // The source of a control squash must still be alive; memory squash
  // targets always are.
  if (sq.kind == SquashKind::Control && !find_block(sq.source_sn)) return;
  if (sq.kind == SquashKind::Memory && !find_block(sq.target_sn)) return;

  std::optional<BpuCheckpoint> restart_cp;
  if (sq.kind == SquashKind::Memory) restart_cp = find_block(sq.target_sn)->checkpoint;

  // Wasted squash: correct-path ops older than the violating load that had
  // already executed and are lost only because the whole block is flushed.
  if (sq.kind == SquashKind::Memory) {
    const Block& victim = *find_block(sq.target_sn);
    for (uint32_t i = 0; i < sq.victim_op; ++i) s_.wasted_squash_ops += victim.ops[i].issued ? 1 : 0;
  }

  uint64_t dropped = 0;
  while (!brob_.empty() && brob_.back().sn >= sq.target_sn) {
    Block& b = brob_.back();
    for (auto r = b.renames.rbegin(); r != b.renames.rend(); ++r) rt_.undo(r->arch, r->phys, r->prev);
    s_.squashed_instructions += b.renamed;
    if (b.bw >= 0 && bws_[b.bw].busy && bws_[b.bw].sn == b.sn) {
      bws_[b.bw].busy = false;
      bws_[b.bw].free_from = now + 1;
    }
    ++dropped;
    brob_.pop_back();
  }
  s_.flush_depth.add(dropped);
  lsu_.squash_from({sq.target_sn, 0});
  feq_.clear();
  fe_blocks_.clear();

  if (sq.kind == SquashKind::Control) {
    Block* src = find_block(sq.source_sn);
    const uint64_t ret_pc = norm(src->head_pc + prog_.blocks[src->block].meta.fall_through_offset);
    bpu_.restore(src->checkpoint, Bpu::Resolved{src->kind, sq.taken, ret_pc});
    src->predicted_next = sq.restart_pc;
    ++s_.control_squashes;
  } else {
    bpu_.restore(*restart_cp, std::nullopt);
    ++s_.memory_squashes;
  }
  fetch_pc_ = sq.restart_pc;
  fetch_resume_ = now + 1 + static_cast<uint64_t>(cfg_.cg_depth - kFrontEndStages);
  if (cfg_.squash_drain_first) drain_wait_ = true;
  emit(opts_, now, "squash", sq.target_sn, -1, sq.restart_pc, -1,
       sq.kind == SquashKind::Control ? "control" : "memory");

  if (opts_.on_squash) {
    SquashAudit a;
    a.kind = sq.kind;
    a.cycle = now;
    a.target_sn = sq.target_sn;
    a.restart_pc = sq.restart_pc;
    a.committed_blocks = s_.blocks;
    for (const auto& b : brob_) {
      a.live_blocks.push_back(b.block);
      a.live_sns.push_back(b.sn);
      a.live_next_pcs.push_back(b.predicted_next);
      for (const auto& r : b.renames) a.live_writes.push_back({r.arch, r.phys});
    }
    a.bpu_state = bpu_.checkpoint();
    a.spec_map = rt_.spec_map();
    a.committed_map = rt_.committed_map();
    a.lsu_youngest = lsu_.youngest();
    for (const auto& w : bws_)
      if (w.busy) a.busy_bw_sns.push_back(w.sn);
    a.rename_consistent = rt_.consistent();
    opts_.on_squash(a);
  }
}

RunStats CgCore::run() {
  s_.core = "cgooo";
  uint64_t now = 1;
  for (; now <= opts_.max_cycles; ++now) {
    cam_this_cycle_ = 0;
    writeback(now);
    commit(now);
    if (done_) {
      ledger_.tick();
      break;
    }
    issue(now);
    fill_head_buffers(now);
    fetch(now);
    rename(now);
    apply_squash(now);

    uint64_t busy = 0;
    for (const auto& w : bws_) busy += w.busy ? 1 : 0;
    s_.bw_occupancy.add(busy);
    s_.bpc_occupancy.add(fe_blocks_.size());
    s_.cam_compares += cam_this_cycle_;
    s_.max_cam_compares_per_cycle = std::max(s_.max_cam_compares_per_cycle, cam_this_cycle_);
    ledger_.tick();
    if (now - last_progress_ > 2'000'000) throw std::logic_error("CG-OoO core made no progress");
  }
  s_.finished = done_;
  s_.cycles = ledger_.cycles();
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

RunStats run_cgooo(const Program& p, const CoreConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (p.blocks.empty()) {
    RunStats s;
    s.core = "cgooo";
    s.finished = true;
    s.final_state = initial_state(p);
    return s;
  }
  CgCore core(p, cfg, opts);
  return core.run();
}

}  // namespace cgsim
