// Experiment runner, parameter sweeps and report emission.

#ifndef CGSIM_HARNESS_HH
#define CGSIM_HARNESS_HH

#include <map>
#include <string>
#include <vector>

#include "cgsim/compiler.hh"
#include "cgsim/config.hh"
#include "cgsim/core.hh"
#include "cgsim/stats.hh"
#include "cgsim/workloads.hh"

namespace cgsim {

// Block-form program for CG-OoO, lowered program (no heads, no locals) for
// the baselines.
Program compile_for(CoreKind core, const Program& source, const CompileOptions& opts = {});

// Runs `program`, which must already be compiled for `core`. Throws
// ConfigError for an invalid config and ProgramError for a program in the
// wrong form.
RunStats run_experiment(const CoreConfig& cfg, const Program& program, CoreKind core,
                        const RunOptions& opts = {});

// Compiles and runs a workload with its cache warm-up ranges.
RunStats run_workload(const CoreConfig& cfg, const Workload& w, CoreKind core,
                      const CompileOptions& copts = {}, RunOptions opts = {});

// Efficiency relative to a reference run: ipc_rel^2 / epc_rel.
double ed_inverse(double ipc_rel, double epc_rel);

struct SweepPoint {
  std::string label;
  std::map<std::string, std::string> overrides;  // CoreConfig keys
};

struct SweepGrid {
  std::string name;
  std::vector<SweepPoint> points;
  std::vector<CoreKind> cores{CoreKind::CgOoo, CoreKind::Ooo, CoreKind::Ino};
};

// Named grids: "hb" (Head Buffer 1..5), "width" (front-end and issue width
// 1..8), "cluster" (3 clusters, BWs x EUs per cluster from {1,1} to {6,8}).
SweepGrid named_grid(const std::string& name);

struct SweepRow {
  std::string kernel;
  std::string core;
  std::string point;
  uint64_t cycles = 0;
  uint64_t instructions = 0;
  double ipc = 0;
  double epc = 0;
  double core_epc = 0;
  double total_pj = 0;
  double ipc_rel = 0;  // relative to OoO on the same kernel and point
  double epc_rel = 0;
  double ed_inv = 0;
};

// One row per point per kernel per core. Normalization uses an OoO run with
// the same kernel and point, whether or not OoO is among the grid's cores.
std::vector<SweepRow> run_sweep(const CoreConfig& base, const SweepGrid& grid,
                                const std::vector<Workload>& kernels);

// CSV with a header line; `config` lines are written first as comments.
std::string sweep_csv(const std::vector<SweepRow>& rows, const CoreConfig& base);

}  // namespace cgsim

#endif  // CGSIM_HARNESS_HH
