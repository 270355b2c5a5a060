#include "cgsim/block_window.hh"

namespace cgsim {

namespace {

bool reads(const Instruction& i, const RegisterRef& r) {
  return (i.src[0] && *i.src[0] == r) || (i.src[1] && *i.src[1] == r);
}

}  // namespace

bool skipahead_conflict(const Instruction& older, const Instruction& younger) {
  if (older.dest && reads(younger, *older.dest)) return true;             // RAW
  if (younger.dest && reads(older, *younger.dest)) return true;           // WAR
  if (older.dest && younger.dest && *older.dest == *younger.dest) return true;  // WAW
  return is_memory(older.op) && is_memory(younger.op);
}

std::optional<size_t> skipahead_select(const std::vector<HbSlot>& hb) {
  for (size_t i = 0; i < hb.size(); ++i) {
    if (!hb[i].sources_ready) continue;
    bool blocked = false;
    for (size_t j = 0; j < i && !blocked; ++j) blocked = skipahead_conflict(*hb[j].inst, *hb[i].inst);
    if (!blocked) return i;
  }
  return std::nullopt;
}

}  // namespace cgsim
