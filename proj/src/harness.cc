#include "cgsim/harness.hh"

#include <cstdio>
#include <sstream>

namespace cgsim {

Program compile_for(CoreKind core, const Program& source, const CompileOptions& opts) {
  Program p = compile(source, opts);
  if (core == CoreKind::CgOoo) return p;
  return lower_for_baseline(p);
}

RunStats run_experiment(const CoreConfig& cfg, const Program& program, CoreKind core,
                        const RunOptions& opts) {
  cfg.validate();
  switch (core) {
    case CoreKind::CgOoo:
      if (!program.has_heads) throw ProgramError("CG-OoO needs a program compiled with heads");
      return run_cgooo(program, cfg, opts);
    case CoreKind::Ooo:
      return run_ooo(program, cfg, opts);
    case CoreKind::Ino:
      return run_ino(program, cfg, opts);
  }
  throw ConfigError("unknown core");
}

RunStats run_workload(const CoreConfig& cfg, const Workload& w, CoreKind core,
                      const CompileOptions& copts, RunOptions opts) {
  opts.warm_ranges.insert(opts.warm_ranges.end(), w.warm_ranges.begin(), w.warm_ranges.end());
  return run_experiment(cfg, compile_for(core, w.program, copts), core, opts);
}

double ed_inverse(double ipc_rel, double epc_rel) { return ipc_rel * ipc_rel / epc_rel; }

SweepGrid named_grid(const std::string& name) {
  SweepGrid g;
  g.name = name;
  if (name == "hb") {
    for (int hb = 1; hb <= 5; ++hb)
      g.points.push_back({"hb=" + std::to_string(hb), {{"hb_size", std::to_string(hb)}}});
  } else if (name == "width") {
    for (int w = 1; w <= 8; ++w) {
      const std::string v = std::to_string(w);
      g.points.push_back({"width=" + v,
                          {{"fetch_width", v}, {"ooo_issue_width", v}, {"ino_issue_width", v}}});
    }
  } else if (name == "cluster") {
    const int pairs[][2] = {{1, 1}, {1, 2}, {2, 2}, {2, 4}, {3, 4}, {4, 4}, {4, 8}, {6, 8}};
    for (const auto& p : pairs) {
      const std::string bw = std::to_string(p[0]), eu = std::to_string(p[1]);
      g.points.push_back({bw + "bw_" + eu + "eu",
                          {{"clusters", "3"}, {"bws_per_cluster", bw}, {"eus_per_cluster", eu},
                           {"grf_segments", std::to_string(3 * p[0])}}});
    }
  } else {
    throw ConfigError("unknown sweep grid '" + name + "' (expected hb, width or cluster)");
  }
  return g;
}

std::vector<SweepRow> run_sweep(const CoreConfig& base, const SweepGrid& grid,
                                const std::vector<Workload>& kernels) {
  std::vector<SweepRow> rows;
  for (const auto& w : kernels) {
    for (const auto& pt : grid.points) {
      CoreConfig cfg = base;
      for (const auto& [k, v] : pt.overrides) cfg.set(k, v);
      cfg.validate();
      const RunStats ref = run_workload(cfg, w, CoreKind::Ooo);
      for (CoreKind core : grid.cores) {
        const RunStats s = core == CoreKind::Ooo ? ref : run_workload(cfg, w, core);
        SweepRow r;
        r.kernel = w.name;
        r.core = std::string(core_name(core));
        r.point = pt.label;
        r.cycles = s.cycles;
        r.instructions = s.instructions;
        r.ipc = s.ipc;
        r.epc = s.epc;
        r.core_epc = s.core_epc;
        r.total_pj = s.total_pj;
        r.ipc_rel = s.ipc / ref.ipc;
        r.epc_rel = s.epc / ref.epc;
        r.ed_inv = ed_inverse(r.ipc_rel, r.epc_rel);
        rows.push_back(r);
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, const CoreConfig& base) {
  std::ostringstream os;
  for (const auto& [k, v] : base.to_map()) os << "# " << k << " = " << v << "\n";
  os << "kernel,core,point,cycles,instructions,ipc,epc,core_epc,total_pj,ipc_rel,epc_rel,ed_inv\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%llu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.kernel.c_str(), r.core.c_str(), r.point.c_str(),
                  static_cast<unsigned long long>(r.cycles), static_cast<unsigned long long>(r.instructions),
                  r.ipc, r.epc, r.core_epc, r.total_pj, r.ipc_rel, r.epc_rel, r.ed_inv);
    os << buf;
  }
  return os.str();
}

}  // namespace cgsim
