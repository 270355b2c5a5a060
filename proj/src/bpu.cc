#include "cgsim/bpu.hh"

#include <bit>

namespace cgsim {

Bpu::Bpu(const CoreConfig& cfg)
    : index_mask_(static_cast<uint32_t>(cfg.bpu_entries - 1)),
      history_mask_((1u << cfg.history_bits) - 1),
      gshare_(cfg.bpu_entries, 1),
      bimodal_(cfg.bpu_entries, 1),
      meta_(cfg.bpu_entries, 1),
      btb_sets_(static_cast<uint32_t>(cfg.btb_entries / cfg.btb_ways)),
      btb_ways_(static_cast<uint32_t>(cfg.btb_ways)),
      btb_index_bits_(static_cast<uint32_t>(std::countr_zero(static_cast<uint32_t>(cfg.btb_entries / cfg.btb_ways)))),
      btb_(static_cast<size_t>(cfg.btb_entries)) {
  ras_.entries.assign(static_cast<size_t>(cfg.ras_depth), 0);
}

void Bpu::bump(uint8_t& c, bool up) {
  if (up && c < 3) ++c;
  if (!up && c > 0) --c;
}

bool Bpu::direction(uint64_t pc) const {
  const uint32_t gi = (static_cast<uint32_t>(pc) ^ history_) & index_mask_;
  const uint32_t bi = static_cast<uint32_t>(pc) & index_mask_;
  const bool use_gshare = meta_[gi] >= 2;
  return (use_gshare ? gshare_[gi] : bimodal_[bi]) >= 2;
}

std::optional<uint64_t> Bpu::btb_lookup(uint64_t pc) {
  const uint32_t set = static_cast<uint32_t>(pc) & (btb_sets_ - 1);
  const auto tag = static_cast<uint16_t>(pc >> btb_index_bits_);
  for (uint32_t w = 0; w < btb_ways_; ++w) {
    auto& e = btb_[set * btb_ways_ + w];
    if (e.valid && e.tag == tag) {
      e.lru = ++btb_clock_;
      ++stats.btb_hits;
      return e.target;
    }
  }
  ++stats.btb_misses;
  return std::nullopt;
}

void Bpu::btb_insert(uint64_t pc, uint64_t target) {
  const uint32_t set = static_cast<uint32_t>(pc) & (btb_sets_ - 1);
  const auto tag = static_cast<uint16_t>(pc >> btb_index_bits_);
  BtbEntry* victim = nullptr;
  for (uint32_t w = 0; w < btb_ways_ && !victim; ++w) {
    auto& e = btb_[set * btb_ways_ + w];
    if (e.valid && e.tag == tag) victim = &e;
  }
  for (uint32_t w = 0; w < btb_ways_ && !victim; ++w) {
    auto& e = btb_[set * btb_ways_ + w];
    if (!e.valid) victim = &e;
  }
  if (!victim) {
    victim = &btb_[set * btb_ways_];
    for (uint32_t w = 1; w < btb_ways_; ++w) {
      auto& e = btb_[set * btb_ways_ + w];
      if (e.lru < victim->lru) victim = &e;
    }
  }
  victim->valid = true;
  victim->tag = tag;
  victim->target = target;
  victim->lru = ++btb_clock_;
}

std::optional<uint64_t> Bpu::ras_top(const RasState& ras) {
  if (ras.count == 0) return std::nullopt;
  const auto n = static_cast<uint32_t>(ras.entries.size());
  return ras.entries[(ras.top + n - 1) % n];
}

void Bpu::advance(uint32_t& history, RasState& ras, uint32_t mask, CtrlKind kind, bool taken,
                  uint64_t return_pc) {
  history = ((history << 1) | (taken ? 1u : 0u)) & mask;
  const auto n = static_cast<uint32_t>(ras.entries.size());
  if (kind == CtrlKind::Call) {
    ras.entries[ras.top] = return_pc;
    ras.top = (ras.top + 1) % n;
    if (ras.count < n) ++ras.count;
  } else if (kind == CtrlKind::Return && ras.count > 0) {
    ras.top = (ras.top + n - 1) % n;
    --ras.count;
  }
}

BpuPrediction Bpu::predict(uint64_t pc, CtrlKind kind, uint64_t return_pc) {
  BpuPrediction p;
  p.before = checkpoint();
  ++stats.lookups;
  p.taken = kind == CtrlKind::Cond ? direction(pc) : true;
  if (kind == CtrlKind::Return) {
    p.target = ras_top(ras_);
  } else if (p.taken) {
    p.target = btb_lookup(pc);
  }
  advance(history_, ras_, history_mask_, kind, p.taken, return_pc);
  return p;
}

void Bpu::update(uint64_t pc, CtrlKind kind, bool taken, uint64_t target, uint32_t history) {
  ++stats.updates;
  if (kind == CtrlKind::Cond) {
    const uint32_t gi = (static_cast<uint32_t>(pc) ^ history) & index_mask_;
    const uint32_t bi = static_cast<uint32_t>(pc) & index_mask_;
    const bool g = gshare_[gi] >= 2;
    const bool b = bimodal_[bi] >= 2;
    if (g != b) bump(meta_[gi], g == taken);
    bump(gshare_[gi], taken);
    bump(bimodal_[bi], taken);
  }
  if (taken && kind != CtrlKind::Return) btb_insert(pc, target);
}

void Bpu::restore(const BpuCheckpoint& cp, std::optional<Resolved> resolved) {
  history_ = cp.history;
  ras_ = cp.ras;
  if (resolved)
    advance(history_, ras_, history_mask_, resolved->kind, resolved->taken, resolved->return_pc);
}

}  // namespace cgsim
