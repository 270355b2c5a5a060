// Head Buffer issue selection (Skipahead).

#ifndef CGSIM_BLOCK_WINDOW_HH
#define CGSIM_BLOCK_WINDOW_HH

#include <optional>
#include <vector>

#include "cgsim/isa.hh"

namespace cgsim {

struct HbSlot {
  const Instruction* inst = nullptr;
  bool sources_ready = false;
};

// True when `younger` may not issue before `older`: a RAW, WAR or WAW
// register dependency (operand identity compare), or both are memory ops.
bool skipahead_conflict(const Instruction& older, const Instruction& younger);

// Scans `hb` oldest first and returns the index of the first entry whose
// sources are ready and that conflicts with no older entry.
std::optional<size_t> skipahead_select(const std::vector<HbSlot>& hb);

}  // namespace cgsim

#endif  // CGSIM_BLOCK_WINDOW_HH
