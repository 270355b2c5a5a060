// Per-run statistics shared by all cores.

#ifndef CGSIM_STATS_HH
#define CGSIM_STATS_HH

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgsim/bpu.hh"
#include "cgsim/energy.hh"
#include "cgsim/interpreter.hh"
#include "cgsim/lsu.hh"
#include "cgsim/rename.hh"

namespace cgsim {

struct Histogram {
  std::map<uint64_t, uint64_t> bins;
  void add(uint64_t v) { ++bins[v]; }
  uint64_t total() const;
  double mean() const;
};

struct CacheStats {
  uint64_t l1_hits = 0, l1_misses = 0;
  uint64_t l2_hits = 0, l2_misses = 0;
  uint64_t l3_hits = 0, l3_misses = 0;
  uint64_t memory_accesses = 0;
};

struct RunStats {
  std::string core;
  bool finished = false;  // false when max_cycles was reached
  uint64_t cycles = 0;
  uint64_t instructions = 0;  // committed body instructions (heads excluded)
  uint64_t blocks = 0;        // committed blocks (CG-OoO only)
  double ipc = 0;

  uint64_t fetch_groups = 0;
  uint64_t fetched_slots = 0;
  uint64_t fetch_stall_cycles = 0;
  uint64_t bpu_lookups = 0;  // charged predictor lookups
  BpuStats bpu;

  uint64_t control_squashes = 0;
  uint64_t memory_squashes = 0;
  uint64_t frontend_refetches = 0;
  uint64_t squashed_instructions = 0;
  uint64_t wasted_squash_ops = 0;  // executed ops older than a violating load, flushed with its block

  RenameStats rename;
  LsuStats lsu;
  CacheStats cache;

  uint64_t cam_compares = 0;
  uint64_t max_cam_compares_per_cycle = 0;
  uint64_t issued = 0;

  Histogram bpc_occupancy;
  Histogram bw_occupancy;
  Histogram flush_depth;

  std::vector<EnergyLedger::Unit> energy_units;
  double dynamic_pj = 0;
  double leakage_pj = 0;
  double total_pj = 0;
  double core_pj = 0;
  double epc = 0;
  double core_epc = 0;

  ArchState final_state;

  nlohmann::json to_json() const;
  // Hex FNV-1a hash of the JSON dump.
  std::string digest() const;
};

void fill_energy(RunStats& s, const EnergyLedger& ledger);

}  // namespace cgsim

#endif  // CGSIM_STATS_HH
