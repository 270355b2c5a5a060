#include "cgsim/stats.hh"

#include <cstdio>

namespace cgsim {

uint64_t Histogram::total() const {
  uint64_t n = 0;
  for (const auto& [k, v] : bins) n += v;
  return n;
}

double Histogram::mean() const {
  double sum = 0;
  uint64_t n = 0;
  for (const auto& [k, v] : bins) {
    sum += static_cast<double>(k) * static_cast<double>(v);
    n += v;
  }
  return n ? sum / static_cast<double>(n) : 0.0;
}

namespace {

nlohmann::json hist_json(const Histogram& h) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : h.bins) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

void fill_energy(RunStats& s, const EnergyLedger& ledger) {
  s.energy_units = ledger.units();
  s.dynamic_pj = ledger.dynamic_pj();
  s.leakage_pj = ledger.leakage_pj();
  s.total_pj = ledger.total_pj();
  s.core_pj = ledger.core_pj();
  s.epc = s.cycles ? s.total_pj / static_cast<double>(s.cycles) : 0.0;
  s.core_epc = s.cycles ? s.core_pj / static_cast<double>(s.cycles) : 0.0;
}

nlohmann::json RunStats::to_json() const {
  nlohmann::json j;
  j["core"] = core;
  j["finished"] = finished;
  j["cycles"] = cycles;
  j["instructions"] = instructions;
  j["blocks"] = blocks;
  j["ipc"] = ipc;
  j["fetch"] = {{"groups", fetch_groups},
                {"slots", fetched_slots},
                {"stall_cycles", fetch_stall_cycles},
                {"bpu_lookups", bpu_lookups}};
  j["bpu"] = {{"lookups", bpu.lookups},
              {"updates", bpu.updates},
              {"btb_hits", bpu.btb_hits},
              {"btb_misses", bpu.btb_misses},
              {"mispredictions", bpu.mispredictions}};
  j["squash"] = {{"control", control_squashes},
                 {"memory", memory_squashes},
                 {"frontend_refetches", frontend_refetches},
                 {"squashed_instructions", squashed_instructions},
                 {"wasted_ops", wasted_squash_ops}};
  j["rename"] = {{"map_reads", rename.map_reads},
                 {"allocations", rename.allocations},
                 {"local_skipped", rename.local_skipped},
                 {"stalls", rename.stalls}};
  j["lsu"] = {{"loads", lsu.loads},
              {"stores", lsu.stores},
              {"forwards", lsu.forwards},
              {"conflicts", lsu.conflicts},
              {"drained", lsu.drained},
              {"lq_searches", lsu.lq_searches},
              {"sq_searches", lsu.sq_searches}};
  j["cache"] = {{"l1_hits", cache.l1_hits}, {"l1_misses", cache.l1_misses},
                {"l2_hits", cache.l2_hits}, {"l2_misses", cache.l2_misses},
                {"l3_hits", cache.l3_hits}, {"l3_misses", cache.l3_misses},
                {"memory_accesses", cache.memory_accesses}};
  j["issue"] = {{"issued", issued},
                {"cam_compares", cam_compares},
                {"max_cam_compares_per_cycle", max_cam_compares_per_cycle}};
  j["histograms"] = {{"bpc_occupancy", hist_json(bpc_occupancy)},
                     {"bw_occupancy", hist_json(bw_occupancy)},
                     {"flush_depth", hist_json(flush_depth)}};
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : energy_units)
    units.push_back({{"unit", u.name},
                     {"category", std::string(category_name(u.category))},
                     {"accesses", u.accesses},
                     {"access_pj", u.access_pj},
                     {"leak_pj_per_cycle", u.leak_pj_per_cycle}});
  j["energy"] = {{"units", units},
                 {"dynamic_pj", dynamic_pj},
                 {"leakage_pj", leakage_pj},
                 {"total_pj", total_pj},
                 {"core_pj", core_pj},
                 {"epc", epc},
                 {"core_epc", core_epc}};
  nlohmann::json regs = nlohmann::json::array();
  for (uint64_t r : final_state.regs) regs.push_back(r);
  nlohmann::json mem = nlohmann::json::object();
  for (const auto& [a, v] : final_state.memory)
    if (v != 0) mem[std::to_string(a)] = v;
  j["final_state"] = {{"regs", regs}, {"memory", mem}};
  return j;
}

std::string RunStats::digest() const {
  const std::string text = to_json().dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cgsim
