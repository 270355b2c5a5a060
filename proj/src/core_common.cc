#include "core_common.hh"

#include "json.hpp"

namespace cgsim {

int log2_ceil(uint64_t v) {
  int b = 0;
  while ((uint64_t{1} << b) < v) ++b;
  return b;
}

void CommonUnits::register_all(EnergyLedger& l, const CoreConfig& cfg) {
  const EnergyParams& e = cfg.energy;
  const auto w = static_cast<uint32_t>(cfg.fetch_width);
  const TableDesc counters{static_cast<uint32_t>(cfg.bpu_entries), 2, 1, 1};
  const TableDesc btb{static_cast<uint32_t>(cfg.btb_entries), 48, 1, 1};
  const double bpu_pj = 3 * access_energy(counters, e) + access_energy(btb, e);
  const double bpu_leak = 3 * table_leakage(counters, e) + table_leakage(btb, e);
  const TableDesc ras_t{static_cast<uint32_t>(cfg.ras_depth), 64, 1, 1};
  const TableDesc fq{static_cast<uint32_t>(cfg.fetch_queue), 64, w, w};
  const double latch_pj = e.ff_pj_per_bit * e.latch_bits;

  icache = l.register_unit("icache", e.l1_pj, 0, EnergyCategory::Cache);
  bpu = l.register_unit("bpu", bpu_pj, bpu_leak, EnergyCategory::FrontEnd);
  bpu_update = l.register_unit("bpu_update", bpu_pj, 0, EnergyCategory::FrontEnd);
  ras = l.register_unit("ras", access_energy(ras_t, e), table_leakage(ras_t, e), EnergyCategory::FrontEnd);
  fetch_queue = l.register_unit("fetch_queue", access_energy(fq, e), table_leakage(fq, e),
                                EnergyCategory::FrontEnd);
  decode = l.register_unit("decode", e.decode_pj, 0, EnergyCategory::FrontEnd);
  latch = l.register_unit("pipeline_latch", latch_pj, 0, EnergyCategory::FrontEnd);

  eu_alu = l.register_unit("eu_alu", e.alu_pj, 0, EnergyCategory::Execute);
  eu_mul = l.register_unit("eu_mul", e.mul_pj, 0, EnergyCategory::Execute);
  eu_agu = l.register_unit("eu_agu", e.agu_pj, 0, EnergyCategory::Execute);
  eu_branch = l.register_unit("eu_branch", e.branch_pj, 0, EnergyCategory::Execute);

  const TableDesc lq{static_cast<uint32_t>(cfg.lq_entries), 80, 1, 1};
  const TableDesc sq{static_cast<uint32_t>(cfg.sq_entries), 144, 1, 1};
  lq_write = l.register_unit("lq_write", access_energy(lq, e), table_leakage(lq, e), EnergyCategory::Lsu);
  lq_row = l.register_unit("lq_cam_row", cam_search_energy(1, 61, e), 0, EnergyCategory::Lsu);
  sq_write = l.register_unit("sq_write", access_energy(sq, e), table_leakage(sq, e), EnergyCategory::Lsu);
  sq_row = l.register_unit("sq_cam_row", cam_search_energy(1, 61, e), 0, EnergyCategory::Lsu);

  l1 = l.register_unit("l1d", e.l1_pj, e.cache_leak_pj, EnergyCategory::Cache);
  l2 = l.register_unit("l2", e.l2_pj, 0, EnergyCategory::Cache);
  l3 = l.register_unit("l3", e.l3_pj, 0, EnergyCategory::Cache);
  dram = l.register_unit("dram", e.mem_pj, 0, EnergyCategory::Cache);

  wire_intra = l.register_unit("wire_intra", wire_energy(64, e.intra_cluster_mm, e), 0, EnergyCategory::Wire);
  wire_inter = l.register_unit("wire_inter", wire_energy(64, e.inter_cluster_mm, e), 0, EnergyCategory::Wire);
}

void CommonUnits::charge_eu(EnergyLedger& l, Opcode op) const {
  if (op == Opcode::Mul)
    l.charge(eu_mul);
  else if (is_memory(op))
    l.charge(eu_agu);
  else if (is_control(op))
    l.charge(eu_branch);
  else if (op != Opcode::Nop)
    l.charge(eu_alu);
}

void CommonUnits::charge_cache(EnergyLedger& l, int level) const {
  l.charge(l1);
  if (level >= 2) l.charge(l2);
  if (level >= 3) l.charge(l3);
  if (level >= 4) l.charge(dram);
}

void warm_caches(CacheHierarchy& c, const RunOptions& opts) {
  for (const auto& [addr, bytes] : opts.warm_ranges) c.warm(addr, bytes);
}

CacheStats collect_cache_stats(const CacheHierarchy& c) {
  CacheStats s;
  s.l1_hits = c.level(0).hits;
  s.l1_misses = c.level(0).misses;
  s.l2_hits = c.level(1).hits;
  s.l2_misses = c.level(1).misses;
  s.l3_hits = c.level(2).hits;
  s.l3_misses = c.level(2).misses;
  s.memory_accesses = c.memory_accesses();
  return s;
}

std::string trace_json(const TraceEvent& e) {
  nlohmann::json j;
  j["cycle"] = e.cycle;
  j["event"] = e.event;
  j["sn"] = e.sn;
  if (e.seq_id >= 0) j["seq_id"] = e.seq_id;
  j["pc"] = e.pc;
  if (e.bw >= 0) j["bw"] = e.bw;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j.dump();
}

}  // namespace cgsim

namespace cgsim {

InstFrontEnd::InstFrontEnd(const Program& p, const CodeLayout& layout, const CoreConfig& cfg, Bpu& bpu,
                           EnergyLedger& ledger, const CommonUnits& cu, int depth, RunStats& stats,
                           const RunOptions& opts)
    : prog_(p),
      layout_(layout),
      cfg_(cfg),
      bpu_(bpu),
      ledger_(ledger),
      cu_(cu),
      depth_(depth),
      s_(stats),
      opts_(opts) {
  pc_ = layout.num_blocks() ? layout.block_pc(0) : CodeLayout::kExitPc;
}

void InstFrontEnd::fetch(uint64_t now) {
  if (now < resume_ || pc_ == CodeLayout::kExitPc ||
      static_cast<int>(queue.size()) + cfg_.fetch_width > cfg_.fetch_queue) {
    ++s_.fetch_stall_cycles;
    return;
  }
  int n = 0;
  while (n < cfg_.fetch_width && pc_ != CodeLayout::kExitPc) {
    const uint64_t pc = pc_;
    const auto slot = layout_.slot(pc);
    FetchedInst f;
    f.sn = next_sn_++;
    f.pc = pc;
    f.inst = &prog_.blocks[slot.block].body[static_cast<size_t>(slot.offset)];
    f.block = slot.block;
    f.fetch_cycle = now;
    const uint64_t fall = norm(pc + 1);
    uint64_t next = fall;
    const CtrlKind kind = ctrl_kind(f.inst->op);
    if (kind != CtrlKind::None) {
      records_.push_back({f.sn, bpu_.checkpoint()});
      f.history = bpu_.history();
      const auto pred = bpu_.predict(pc, kind, return_pc(slot.block));
      if (pred.taken && pred.target &&
          (*pred.target == CodeLayout::kExitPc ||
           (*pred.target < layout_.size() && layout_.slot(*pred.target).offset == 0)))
        next = *pred.target;
      if (kind == CtrlKind::Call || kind == CtrlKind::Return) ledger_.charge(cu_.ras);
    }
    f.predicted_next = next;
    queue.push_back(f);
    ++n;
    ledger_.charge(cu_.latch, static_cast<uint64_t>(depth_));
    ledger_.charge(cu_.fetch_queue);
    emit(opts_, now, "fetch", f.sn, f.inst->seq_id, pc);
    pc_ = next;
    if (next != fall || line_boundary_after(pc)) break;
  }
  if (n == 0) {
    ++s_.fetch_stall_cycles;
    return;
  }
  ++s_.fetch_groups;
  s_.fetched_slots += static_cast<uint64_t>(n);
  ++s_.bpu_lookups;
  ledger_.charge(cu_.icache);
  ledger_.charge(cu_.bpu);
}

void InstFrontEnd::redirect(uint64_t pc, uint64_t resume) {
  queue.clear();
  pc_ = pc;
  resume_ = resume;
}

void InstFrontEnd::drop_records_from(uint64_t sn) {
  while (!records_.empty() && records_.back().sn >= sn) records_.pop_back();
}

void InstFrontEnd::recover_control(const FetchedInst& branch, bool taken) {
  for (const auto& r : records_) {
    if (r.sn != branch.sn) continue;
    bpu_.restore(r.cp, Bpu::Resolved{ctrl_kind(branch.inst->op), taken, return_pc(branch.block)});
    break;
  }
  drop_records_from(branch.sn + 1);
}

void InstFrontEnd::recover_memory(uint64_t target) {
  for (const auto& r : records_) {
    if (r.sn < target) continue;
    bpu_.restore(r.cp, std::nullopt);
    break;
  }
  drop_records_from(target);
}

void InstFrontEnd::retire_through(uint64_t sn) {
  while (!records_.empty() && records_.front().sn <= sn) records_.pop_front();
}

}  // namespace cgsim
