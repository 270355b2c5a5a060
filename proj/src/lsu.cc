#include "cgsim/lsu.hh"

#include <stdexcept>

namespace cgsim {

Lsu::Lsu(int lq_entries, int sq_entries) : lq_cap_(lq_entries), sq_cap_(sq_entries) {}

bool Lsu::can_allocate(int loads, int stores) const {
  return static_cast<int>(loads_.size()) + loads <= lq_cap_ &&
         static_cast<int>(stores_.size()) + stores <= sq_cap_;
}

void Lsu::allocate(const OrderKey& k, bool is_store) {
  if (is_store)
    stores_.emplace(k, Store{});
  else
    loads_.emplace(k, Load{});
}

LoadOutcome Lsu::execute_load(const OrderKey& k, uint64_t addr,
                              const std::map<uint64_t, uint64_t>& memory) {
  auto it = loads_.find(k);
  if (it == loads_.end()) throw std::logic_error("load executed without an LSU entry");
  ++stats.loads;
  stats.sq_searches += stores_.size();
  LoadOutcome out;
  it->second.executed = true;
  it->second.addr = addr;
  it->second.source.reset();
  auto s = stores_.lower_bound(k);
  while (s != stores_.begin()) {
    --s;
    if (s->second.executed && s->second.addr == addr) {
      out.value = s->second.data;
      out.forwarded = true;
      it->second.source = s->first;
      ++stats.forwards;
      return out;
    }
  }
  auto m = memory.find(addr);
  out.value = m == memory.end() ? 0 : m->second;
  return out;
}

std::optional<OrderKey> Lsu::execute_store(const OrderKey& k, uint64_t addr, uint64_t data) {
  auto it = stores_.find(k);
  if (it == stores_.end()) throw std::logic_error("store executed without an LSU entry");
  ++stats.stores;
  stats.lq_searches += loads_.size();
  it->second.executed = true;
  it->second.addr = addr;
  it->second.data = data;
  for (auto l = loads_.upper_bound(k); l != loads_.end(); ++l) {
    const auto& ld = l->second;
    if (!ld.executed || ld.addr != addr) continue;
    if (!ld.source || *ld.source < k) {
      ++stats.conflicts;
      return l->first;
    }
  }
  return std::nullopt;
}

std::vector<StoreRecord> Lsu::commit_through(uint64_t sn) {
  std::vector<StoreRecord> out;
  while (!stores_.empty() && stores_.begin()->first.sn <= sn) {
    const auto& st = stores_.begin()->second;
    if (!st.executed) throw std::logic_error("committing a store that never executed");
    out.push_back({st.addr, st.data});
    stores_.erase(stores_.begin());
  }
  while (!loads_.empty() && loads_.begin()->first.sn <= sn) loads_.erase(loads_.begin());
  stats.drained += out.size();
  return out;
}

void Lsu::squash_from(const OrderKey& from) {
  loads_.erase(loads_.lower_bound(from), loads_.end());
  stores_.erase(stores_.lower_bound(from), stores_.end());
}

std::optional<OrderKey> Lsu::oldest() const {
  std::optional<OrderKey> o;
  if (!loads_.empty()) o = loads_.begin()->first;
  if (!stores_.empty() && (!o || stores_.begin()->first < *o)) o = stores_.begin()->first;
  return o;
}

std::optional<OrderKey> Lsu::youngest() const {
  std::optional<OrderKey> o;
  if (!loads_.empty()) o = loads_.rbegin()->first;
  if (!stores_.empty() && (!o || *o < stores_.rbegin()->first)) o = stores_.rbegin()->first;
  return o;
}

}  // namespace cgsim
