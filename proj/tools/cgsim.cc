// Command-line driver: compile, run, sweep, trace and kernel subcommands.

#include <fstream>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "cgsim/assembly.hh"
#include "cgsim/harness.hh"
#include "cgsim/keyvalue.hh"

using namespace cgsim;

namespace {

struct Common {
  std::string core = "cgooo";
  std::string kernel;
  std::string program;
  std::string config;
  std::vector<std::string> sets;
  int iterations = 0;
  bool no_schedule = false;
  uint64_t max_cycles = 20'000'000;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--core", c.core, "cgooo, ooo or ino")->check(CLI::IsMember({"cgooo", "ooo", "ino"}));
  app->add_option("--kernel", c.kernel, "shipped kernel name");
  app->add_option("--program", c.program, "source .casm file (compiled for the selected core)");
  app->add_option("--config", c.config, "key = value config file");
  app->add_option("--set", c.sets, "config override key=value (repeatable)");
  app->add_option("--iterations", c.iterations, "kernel trip count (0 keeps the default)");
  app->add_flag("--no-schedule", c.no_schedule, "disable block list scheduling");
  app->add_option("--max-cycles", c.max_cycles, "cycle limit");
}

CoreConfig load_config(const Common& c) {
  CoreConfig cfg = c.config.empty() ? CoreConfig{} : CoreConfig::from_file(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

Workload load_workload(const Common& c) {
  if (!c.kernel.empty() == !c.program.empty()) throw std::invalid_argument("give exactly one of --kernel or --program");
  if (!c.kernel.empty()) return make_kernel(c.kernel, c.iterations);
  Workload w;
  w.name = c.program;
  w.source = read_text_file(c.program);
  w.program = parse_program(w.source);
  return w;
}

nlohmann::json config_json(const CoreConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : cfg.to_map()) j[k] = v;
  return j;
}

int cmd_compile(const std::string& in, const std::string& out, bool baseline, bool no_schedule) {
  CompileOptions opts;
  opts.schedule = !no_schedule;
  const Program src = load_program_file(in);
  const Program p = compile_for(baseline ? CoreKind::Ooo : CoreKind::CgOoo, src, opts);
  if (out.empty())
    std::cout << emit_program(p);
  else
    save_program_file(p, out);
  return 0;
}

int cmd_run(const Common& c) {
  const CoreConfig cfg = load_config(c);
  const Workload w = load_workload(c);
  CompileOptions copts;
  copts.schedule = !c.no_schedule;
  RunOptions opts;
  opts.max_cycles = c.max_cycles;
  const RunStats s = run_workload(cfg, w, core_from_name(c.core), copts, opts);
  nlohmann::json j = s.to_json();
  j["workload"] = w.name;
  j["digest"] = s.digest();
  j["config"] = config_json(cfg);
  std::cout << j.dump(2) << "\n";
  return s.finished ? 0 : 2;
}

int cmd_trace(const Common& c, const std::string& out) {
  const CoreConfig cfg = load_config(c);
  const Workload w = load_workload(c);
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot write '" + out + "'");
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << nlohmann::json{{"config", config_json(cfg)}, {"workload", w.name}, {"core", c.core}}.dump() << "\n";
  CompileOptions copts;
  copts.schedule = !c.no_schedule;
  RunOptions opts;
  opts.max_cycles = c.max_cycles;
  opts.trace = [&](const TraceEvent& e) { os << trace_json(e) << "\n"; };
  const RunStats s = run_workload(cfg, w, core_from_name(c.core), copts, opts);
  os << nlohmann::json{{"summary", {{"cycles", s.cycles}, {"instructions", s.instructions}, {"ipc", s.ipc}}}}.dump()
     << "\n";
  return s.finished ? 0 : 2;
}

int cmd_sweep(const Common& c, const std::string& grid, const std::vector<std::string>& kernels,
              const std::string& out) {
  const CoreConfig cfg = load_config(c);
  std::vector<Workload> ws;
  for (const auto& k : kernels.empty() ? kernel_names() : kernels) ws.push_back(make_kernel(k, c.iterations));
  const std::string csv = sweep_csv(run_sweep(cfg, named_grid(grid), ws), cfg);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    f << csv;
  }
  return 0;
}

int cmd_kernel(const std::string& name, bool list, int iterations, const std::string& out) {
  if (list || name.empty()) {
    for (const auto& k : kernel_names()) std::cout << k << "  " << make_kernel(k, 1).description << "\n";
    return 0;
  }
  const Workload w = make_kernel(name, iterations);
  if (out.empty()) {
    std::cout << w.source;
  } else {
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot write '" + out + "'");
    f << w.source;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level CG-OoO / OoO / InO simulator"};
  app.require_subcommand(1);

  std::string in, out;
  bool baseline = false, no_schedule = false;
  auto* compile_cmd = app.add_subcommand("compile", "compile a .casm program to block form");
  compile_cmd->add_option("input", in, "source .casm")->required()->check(CLI::ExistingFile);
  compile_cmd->add_option("-o,--output", out, "output file (stdout if omitted)");
  compile_cmd->add_flag("--baseline", baseline, "emit the lowered program for the baseline cores");
  compile_cmd->add_flag("--no-schedule", no_schedule, "disable block list scheduling");

  Common run_c, trace_c, sweep_c;
  auto* run_cmd = app.add_subcommand("run", "simulate one program and print JSON stats");
  add_common(run_cmd, run_c);

  std::string trace_out;
  auto* trace_cmd = app.add_subcommand("trace", "simulate and emit JSON-lines pipeline events");
  add_common(trace_cmd, trace_c);
  trace_cmd->add_option("-o,--output", trace_out, "output file (stdout if omitted)");

  std::string grid = "hb", sweep_out;
  std::vector<std::string> sweep_kernels;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid and print CSV");
  add_common(sweep_cmd, sweep_c);
  sweep_cmd->add_option("--grid", grid, "hb, width or cluster");
  sweep_cmd->add_option("--kernels", sweep_kernels, "kernels to run (default: all)")->delimiter(',');
  sweep_cmd->add_option("-o,--output", sweep_out, "output file (stdout if omitted)");

  std::string kname, kout;
  bool klist = false;
  int kiter = 0;
  auto* kernel_cmd = app.add_subcommand("kernel", "list kernels or print one as .casm");
  kernel_cmd->add_option("name", kname, "kernel name");
  kernel_cmd->add_flag("--list", klist, "list the shipped kernels");
  kernel_cmd->add_option("--iterations", kiter, "trip count (0 keeps the default)");
  kernel_cmd->add_option("-o,--output", kout, "output file (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*compile_cmd) return cmd_compile(in, out, baseline, no_schedule);
    if (*run_cmd) return cmd_run(run_c);
    if (*trace_cmd) return cmd_trace(trace_c, trace_out);
    if (*sweep_cmd) return cmd_sweep(sweep_c, grid, sweep_kernels, sweep_out);
    if (*kernel_cmd) return cmd_kernel(kname, klist, kiter, kout);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
