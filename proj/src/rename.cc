#include "cgsim/rename.hh"

#include <cstdlib>
#include <stdexcept>

namespace cgsim {

RenameTable::RenameTable(int phys_regs, int segments)
    : value(static_cast<size_t>(phys_regs), 0),
      ready_cycle(static_cast<size_t>(phys_regs), 0),
      producer_cluster(static_cast<size_t>(phys_regs), -1),
      phys_(phys_regs),
      state_(static_cast<size_t>(phys_regs), PhysState::Free),
      free_(static_cast<size_t>(segments)) {
  if (phys_regs <= kArchGlobals) throw std::invalid_argument("need more physical than architectural registers");
  for (int a = 0; a < kArchGlobals; ++a) {
    spec_[a] = committed_[a] = static_cast<uint16_t>(a);
    state_[a] = PhysState::Architectural;
  }
  for (int p = kArchGlobals; p < phys_regs; ++p) free_[segment_of(static_cast<uint16_t>(p))].insert(static_cast<uint16_t>(p));
}

int RenameTable::segment_of(uint16_t phys) const {
  return static_cast<int>(static_cast<int64_t>(phys) * segments() / phys_);
}

bool RenameTable::has_free() const {
  for (const auto& f : free_)
    if (!f.empty()) return true;
  return false;
}

size_t RenameTable::free_count() const {
  size_t n = 0;
  for (const auto& f : free_) n += f.size();
  return n;
}

std::optional<std::pair<uint16_t, uint16_t>> RenameTable::rename(uint8_t arch, int preferred) {
  int best = -1;
  for (int s = 0; s < segments(); ++s) {
    if (free_[s].empty()) continue;
    if (best < 0 || std::abs(s - preferred) < std::abs(best - preferred)) best = s;
  }
  if (best < 0) return std::nullopt;
  const uint16_t p = *free_[best].begin();
  free_[best].erase(free_[best].begin());
  state_[p] = PhysState::Speculative;
  ready_cycle[p] = ~uint64_t{0};
  producer_cluster[p] = -1;
  const uint16_t prev = spec_[arch];
  spec_[arch] = p;
  ++stats.allocations;
  return std::make_pair(p, prev);
}

void RenameTable::undo(uint8_t arch, uint16_t phys, uint16_t previous) {
  if (spec_[arch] != phys) throw std::logic_error("rename undo out of order");
  spec_[arch] = previous;
  state_[phys] = PhysState::Free;
  free_[segment_of(phys)].insert(phys);
}

void RenameTable::commit(uint8_t arch, uint16_t phys) {
  const uint16_t old = committed_[arch];
  committed_[arch] = phys;
  state_[phys] = PhysState::Architectural;
  state_[old] = PhysState::Free;
  free_[segment_of(old)].insert(old);
}

bool RenameTable::consistent() const {
  std::vector<int> owners(static_cast<size_t>(phys_), 0);
  for (int a = 0; a < kArchGlobals; ++a) {
    if (++owners[spec_[a]] > 1) return false;
    if (state_[spec_[a]] == PhysState::Free || state_[committed_[a]] != PhysState::Architectural)
      return false;
  }
  std::vector<int> committed_owners(static_cast<size_t>(phys_), 0);
  for (int a = 0; a < kArchGlobals; ++a)
    if (++committed_owners[committed_[a]] > 1) return false;
  for (const auto& f : free_)
    for (uint16_t p : f)
      if (owners[p] || committed_owners[p] || state_[p] != PhysState::Free) return false;
  return true;
}

}  // namespace cgsim
