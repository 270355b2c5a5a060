// Load/store queues ordered by (sequence number, position). CG-OoO uses the
// block sequence number and the position inside the block; the baselines use
// one sequence number per instruction.

#ifndef CGSIM_LSU_HH
#define CGSIM_LSU_HH

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cgsim/interpreter.hh"

namespace cgsim {

struct OrderKey {
  uint64_t sn = 0;
  uint32_t seq = 0;
  friend auto operator<=>(const OrderKey&, const OrderKey&) = default;
};

struct LoadOutcome {
  uint64_t value = 0;
  bool forwarded = false;
};

struct LsuStats {
  uint64_t loads = 0;
  uint64_t stores = 0;
  uint64_t forwards = 0;
  uint64_t conflicts = 0;
  uint64_t drained = 0;
  uint64_t lq_searches = 0;  // rows compared in the load queue
  uint64_t sq_searches = 0;  // rows compared in the store queue
};

class Lsu {
 public:
  Lsu(int lq_entries, int sq_entries);

  bool can_allocate(int loads, int stores) const;
  void allocate(const OrderKey& k, bool is_store);

  // Forwards from the youngest older executed store to the same word, else
  // reads `memory`.
  LoadOutcome execute_load(const OrderKey& k, uint64_t addr, const std::map<uint64_t, uint64_t>& memory);

  // Records the store and returns the oldest younger executed load that read
  // a stale value, if any.
  std::optional<OrderKey> execute_store(const OrderKey& k, uint64_t addr, uint64_t data);

  // Removes every entry with sn <= `sn`; returns executed stores in order.
  std::vector<StoreRecord> commit_through(uint64_t sn);
  // Removes every entry at or after `from`.
  void squash_from(const OrderKey& from);

  size_t loads_in_flight() const { return loads_.size(); }
  size_t stores_in_flight() const { return stores_.size(); }
  bool empty() const { return loads_.empty() && stores_.empty(); }
  // Smallest key present, if any.
  std::optional<OrderKey> oldest() const;
  std::optional<OrderKey> youngest() const;

  LsuStats stats;

 private:
  struct Load {
    bool executed = false;
    uint64_t addr = 0;
    std::optional<OrderKey> source;  // forwarding store
  };
  struct Store {
    bool executed = false;
    uint64_t addr = 0;
    uint64_t data = 0;
  };
  int lq_cap_;
  int sq_cap_;
  std::map<OrderKey, Load> loads_;
  std::map<OrderKey, Store> stores_;
};

}  // namespace cgsim

#endif  // CGSIM_LSU_HH
