// Merged rename / architectural register file: speculative and committed maps
// over a pool of physical registers split into segments.

#ifndef CGSIM_RENAME_HH
#define CGSIM_RENAME_HH

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "cgsim/isa.hh"

namespace cgsim {

enum class PhysState : uint8_t { Free, Speculative, Architectural };

struct RenameStats {
  uint64_t map_reads = 0;     // source operand lookups
  uint64_t allocations = 0;   // destination renames
  uint64_t local_skipped = 0; // operands with RRF = 0
  uint64_t stalls = 0;        // cycles blocked on an empty free list
};

class RenameTable {
 public:
  RenameTable(int phys_regs, int segments);

  int segments() const { return static_cast<int>(free_.size()); }
  int segment_of(uint16_t phys) const;
  bool has_free() const;
  size_t free_count() const;

  uint16_t lookup(uint8_t arch) const { return spec_[arch]; }
  uint16_t committed(uint8_t arch) const { return committed_[arch]; }
  const std::array<uint16_t, kArchGlobals>& spec_map() const { return spec_; }
  const std::array<uint16_t, kArchGlobals>& committed_map() const { return committed_; }

  // Allocates from the segment nearest `preferred` (ties go to the lower
  // segment) and maps `arch` to it. Returns {new, previous speculative}.
  std::optional<std::pair<uint16_t, uint16_t>> rename(uint8_t arch, int preferred);
  // Reverts one rename; must be applied youngest first.
  void undo(uint8_t arch, uint16_t phys, uint16_t previous);
  // Promotes `phys` as the committed mapping of `arch` and frees the old one.
  void commit(uint8_t arch, uint16_t phys);

  PhysState state(uint16_t phys) const { return state_[phys]; }
  // Checks that the maps are injective and disjoint from the free lists.
  bool consistent() const;

  // Value storage and ready time for each physical register.
  std::vector<uint64_t> value;
  std::vector<uint64_t> ready_cycle;
  std::vector<int> producer_cluster;

  RenameStats stats;

 private:
  int phys_;
  std::array<uint16_t, kArchGlobals> spec_{};
  std::array<uint16_t, kArchGlobals> committed_{};
  std::vector<PhysState> state_;
  std::vector<std::set<uint16_t>> free_;
};

}  // namespace cgsim

#endif  // CGSIM_RENAME_HH
