// Functional reference model. Executes a Program block by block with no
// timing; every timing core must end in the same architectural state.

#ifndef CGSIM_INTERPRETER_HH
#define CGSIM_INTERPRETER_HH

#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cgsim/isa.hh"

namespace cgsim {

using RegMask = std::bitset<kArchGlobals>;

struct ArchState {
  std::array<uint64_t, kArchGlobals> regs{};
  std::map<uint64_t, uint64_t> memory;  // aligned address -> word; absent reads as 0
};

ArchState initial_state(const Program& p);

// Differences between two states, restricted to registers in `regs`.
// Memory words equal to zero are treated as absent.
std::vector<std::string> diff_states(const ArchState& expected, const ArchState& actual,
                                     const RegMask& regs);

struct StoreRecord {
  uint64_t addr = 0;
  uint64_t value = 0;
  friend bool operator==(const StoreRecord&, const StoreRecord&) = default;
};

// Runs one dynamic instance of block `block` on `state` (locals start at 0)
// and returns the next block index; any value >= blocks.size() means exit.
uint64_t execute_block(const Program& p, size_t block, ArchState& state,
                       std::vector<StoreRecord>* stores = nullptr);

struct OracleTrace {
  ArchState final_state;
  std::vector<uint32_t> path;  // dynamic sequence of block indices
  std::vector<StoreRecord> stores;
  uint64_t instructions = 0;   // body instructions, heads excluded
  bool finished = false;       // false when the instruction budget ran out
};

OracleTrace run_oracle(const Program& p, uint64_t max_instructions = 20'000'000);

// Global registers named anywhere in the program or initialized by it.
RegMask globals_used(const Program& p);

}  // namespace cgsim

#endif  // CGSIM_INTERPRETER_HH
