#include "cgsim/cache.hh"

#include <algorithm>

namespace cgsim {

CacheLevel::CacheLevel(int size_kb, int ways, int latency)
    : sets_(static_cast<uint32_t>(size_kb * 1024 / 64 / ways)),
      ways_(static_cast<uint32_t>(ways)),
      latency_(latency),
      data_(static_cast<size_t>(sets_) * ways_) {}

bool CacheLevel::probe(uint64_t line) const {
  const uint32_t set = static_cast<uint32_t>(line & (sets_ - 1));
  for (uint32_t w = 0; w < ways_; ++w) {
    const auto& e = data_[set * ways_ + w];
    if (e.valid && e.line == line) return true;
  }
  return false;
}

bool CacheLevel::lookup(uint64_t line) {
  const uint32_t set = static_cast<uint32_t>(line & (sets_ - 1));
  for (uint32_t w = 0; w < ways_; ++w) {
    auto& e = data_[set * ways_ + w];
    if (e.valid && e.line == line) {
      e.lru = ++clock_;
      ++hits;
      return true;
    }
  }
  ++misses;
  return false;
}

std::optional<uint64_t> CacheLevel::fill(uint64_t line) {
  const uint32_t set = static_cast<uint32_t>(line & (sets_ - 1));
  Way* victim = nullptr;
  for (uint32_t w = 0; w < ways_; ++w) {
    auto& e = data_[set * ways_ + w];
    if (e.valid && e.line == line) {
      e.lru = ++clock_;
      return std::nullopt;
    }
  }
  for (uint32_t w = 0; w < ways_ && !victim; ++w)
    if (!data_[set * ways_ + w].valid) victim = &data_[set * ways_ + w];
  if (!victim) {
    victim = &data_[set * ways_];
    for (uint32_t w = 1; w < ways_; ++w)
      if (data_[set * ways_ + w].lru < victim->lru) victim = &data_[set * ways_ + w];
  }
  std::optional<uint64_t> evicted;
  if (victim->valid) evicted = victim->line;
  victim->valid = true;
  victim->line = line;
  victim->lru = ++clock_;
  return evicted;
}

void CacheLevel::invalidate(uint64_t line) {
  const uint32_t set = static_cast<uint32_t>(line & (sets_ - 1));
  for (uint32_t w = 0; w < ways_; ++w) {
    auto& e = data_[set * ways_ + w];
    if (e.valid && e.line == line) e.valid = false;
  }
}

CacheHierarchy::CacheHierarchy(const CoreConfig& cfg)
    : levels_{CacheLevel(cfg.l1_kb, cfg.l1_ways, cfg.l1_latency),
              CacheLevel(cfg.l2_kb, cfg.l2_ways, cfg.l2_latency),
              CacheLevel(cfg.l3_kb, cfg.l3_ways, cfg.l3_latency)},
      mem_latency_(cfg.mem_latency) {}

CacheAccess CacheHierarchy::access(uint64_t addr) {
  const uint64_t line = addr / kLineBytes;
  CacheAccess a;
  int hit_level = 3;
  for (int i = 0; i < 3; ++i) {
    a.latency += levels_[i].latency();
    if (levels_[i].lookup(line)) {
      hit_level = i;
      break;
    }
  }
  if (hit_level == 3) {
    a.latency += mem_latency_;
    ++memory_accesses_;
  }
  a.level = hit_level + 1;
  // Fill from the outermost missing level inwards; evictions keep inclusion.
  for (int i = hit_level - 1; i >= 0; --i) {
    if (auto ev = levels_[i].fill(line)) {
      for (int j = 0; j < i; ++j) levels_[j].invalidate(*ev);
    }
  }
  return a;
}

void CacheHierarchy::warm(uint64_t addr, uint64_t bytes) {
  const uint64_t first = addr / kLineBytes;
  const uint64_t last = (addr + bytes + kLineBytes - 1) / kLineBytes;
  for (uint64_t line = first; line < last; ++line)
    for (int i = 2; i >= 0; --i)
      if (auto ev = levels_[i].fill(line))
        for (int j = 0; j < i; ++j) levels_[j].invalidate(*ev);
}

}  // namespace cgsim
