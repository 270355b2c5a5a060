// Microkernel suite and random program generator. Every workload is produced
// as assembly text and parsed, so a kernel can be dumped, edited and read
// back with the same tools.

#ifndef CGSIM_WORKLOADS_HH
#define CGSIM_WORKLOADS_HH

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cgsim/isa.hh"

namespace cgsim {

struct Workload {
  std::string name;
  std::string description;
  std::string source;  // assembly text
  Program program;     // parsed source, no heads
  // Byte ranges to preload into the caches before a run.
  std::vector<std::pair<uint64_t, uint64_t>> warm_ranges;
};

// Names of the shipped microkernels, in a fixed order.
const std::vector<std::string>& kernel_names();

// Builds a shipped kernel; `iterations` = 0 keeps the default trip count.
// Throws std::invalid_argument for an unknown name.
Workload make_kernel(const std::string& name, int iterations = 0);

// The four-op head-of-queue example used to pin Skipahead behavior:
//   1: lw  r1, 0(g1)   2: add r2, r1, g2   3: add r3, g3, g4   4: add r4, r2, g5
// as a single block with a head, followed by an exit.
Workload issue_model_kernel();

struct RandomProgramOptions {
  int min_segments = 3;
  int max_segments = 7;
  int memory_words = 16;  // size of the shared data region
  bool calls = true;
};

// Random terminating program with data-dependent branches, counted loops,
// leaf calls, and loads/stores to a small shared region (late store
// addresses force memory-order violations). Deterministic in `seed`.
Workload random_workload(uint64_t seed, const RandomProgramOptions& opts = {});

}  // namespace cgsim

#endif  // CGSIM_WORKLOADS_HH
