// Fixed-latency inclusive three-level data cache with LRU replacement.

#ifndef CGSIM_CACHE_HH
#define CGSIM_CACHE_HH

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cgsim/config.hh"

namespace cgsim {

class CacheLevel {
 public:
  CacheLevel(int size_kb, int ways, int latency);

  bool probe(uint64_t line) const;
  // Touches the line if present; returns whether it hit.
  bool lookup(uint64_t line);
  // Inserts the line; returns the evicted line, if any.
  std::optional<uint64_t> fill(uint64_t line);
  void invalidate(uint64_t line);
  int latency() const { return latency_; }

  uint64_t hits = 0;
  uint64_t misses = 0;

 private:
  struct Way {
    uint64_t line = 0;
    uint64_t lru = 0;
    bool valid = false;
  };
  uint32_t sets_;
  uint32_t ways_;
  int latency_;
  uint64_t clock_ = 0;
  std::vector<Way> data_;
};

struct CacheAccess {
  int latency = 0;
  int level = 1;  // 1..3, 4 = memory
};

class CacheHierarchy {
 public:
  static constexpr uint64_t kLineBytes = 64;

  explicit CacheHierarchy(const CoreConfig& cfg);

  CacheAccess access(uint64_t addr);
  // Brings every line of [addr, addr + bytes) into all levels.
  void warm(uint64_t addr, uint64_t bytes);
  bool in_l1(uint64_t addr) const { return levels_[0].probe(addr / kLineBytes); }

  const CacheLevel& level(int i) const { return levels_[static_cast<size_t>(i)]; }
  uint64_t memory_accesses() const { return memory_accesses_; }

 private:
  std::array<CacheLevel, 3> levels_;
  int mem_latency_;
  uint64_t memory_accesses_ = 0;
};

}  // namespace cgsim

#endif  // CGSIM_CACHE_HH
