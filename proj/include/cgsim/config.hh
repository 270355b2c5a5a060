// Core configuration for all three cores. Files use `key = value` lines with
// the field names below.

#ifndef CGSIM_CONFIG_HH
#define CGSIM_CONFIG_HH

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cgsim/energy.hh"

namespace cgsim {

enum class CoreKind { CgOoo, Ooo, Ino };
std::string_view core_name(CoreKind k);
CoreKind core_from_name(std::string_view name);

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CoreConfig {
  // Front end (all cores).
  int fetch_width = 4;
  int fetch_queue = 16;   // fetched instructions waiting for decode
  int bpc_buffer = 8;     // Block PC Buffer entries
  int bpu_entries = 8192;
  int history_bits = 13;
  int btb_entries = 4096;
  int btb_ways = 8;
  int ras_depth = 16;

  // CG-OoO.
  int clusters = 3;
  int bws_per_cluster = 3;
  int eus_per_cluster = 4;
  int hb_size = 4;
  int bw_iq_size = 10;
  int lrf_size = 20;
  int grf_regs = 256;
  int grf_segments = 9;
  int brob_entries = 16;
  int max_gw = 8;
  int commit_blocks = 1;
  int cg_depth = 13;
  int inter_cluster_delay = 1;
  bool squash_drain_first = false;

  // OoO baseline.
  int ooo_issue_width = 4;
  int ooo_window = 128;
  int ooo_rob = 160;
  int ooo_regs = 256;
  int ooo_depth = 13;

  // InO baseline.
  int ino_issue_width = 4;
  int ino_iq = 8;
  int ino_regs = 70;
  int ino_depth = 7;

  // Memory system.
  int lq_entries = 64;
  int sq_entries = 32;
  int l1_kb = 32, l1_ways = 8, l1_latency = 4;
  int l2_kb = 256, l2_ways = 8, l2_latency = 12;
  int l3_kb = 4096, l3_ways = 8, l3_latency = 40;
  int mem_latency = 100;

  EnergyParams energy;

  int total_bws() const { return clusters * bws_per_cluster; }

  void validate() const;  // throws ConfigError
  void set(const std::string& key, const std::string& value);
  static CoreConfig from_string(std::string_view text);
  static CoreConfig from_file(const std::string& path);
  // Every field, including energy parameters, as strings.
  std::map<std::string, std::string> to_map() const;
};

}  // namespace cgsim

#endif  // CGSIM_CONFIG_HH
