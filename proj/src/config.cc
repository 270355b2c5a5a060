#include "cgsim/config.hh"

#include <charconv>
#include <sstream>

#include "cgsim/keyvalue.hh"

namespace cgsim {

std::string_view core_name(CoreKind k) {
  switch (k) {
    case CoreKind::CgOoo: return "cgooo";
    case CoreKind::Ooo: return "ooo";
    case CoreKind::Ino: return "ino";
  }
  return "?";
}

CoreKind core_from_name(std::string_view name) {
  if (name == "cgooo" || name == "cg") return CoreKind::CgOoo;
  if (name == "ooo") return CoreKind::Ooo;
  if (name == "ino") return CoreKind::Ino;
  throw ConfigError("unknown core '" + std::string(name) + "' (expected cgooo, ooo or ino)");
}

namespace {

struct IntField {
  const char* name;
  int CoreConfig::*field;
  int min;
  int max;
};

constexpr IntField kIntFields[] = {
    {"fetch_width", &CoreConfig::fetch_width, 1, 8},
    {"fetch_queue", &CoreConfig::fetch_queue, 1, 256},
    {"bpc_buffer", &CoreConfig::bpc_buffer, 1, 64},
    {"bpu_entries", &CoreConfig::bpu_entries, 2, 1 << 20},
    {"history_bits", &CoreConfig::history_bits, 1, 20},
    {"btb_entries", &CoreConfig::btb_entries, 1, 1 << 20},
    {"btb_ways", &CoreConfig::btb_ways, 1, 64},
    {"ras_depth", &CoreConfig::ras_depth, 1, 256},
    {"clusters", &CoreConfig::clusters, 1, 3},
    {"bws_per_cluster", &CoreConfig::bws_per_cluster, 1, 18},
    {"eus_per_cluster", &CoreConfig::eus_per_cluster, 1, 8},
    {"hb_size", &CoreConfig::hb_size, 1, 5},
    {"bw_iq_size", &CoreConfig::bw_iq_size, 1, 64},
    {"lrf_size", &CoreConfig::lrf_size, 20, 20},
    {"grf_regs", &CoreConfig::grf_regs, 65, 4096},
    {"grf_segments", &CoreConfig::grf_segments, 1, 18},
    {"brob_entries", &CoreConfig::brob_entries, 1, 256},
    {"max_gw", &CoreConfig::max_gw, 1, 32},
    {"commit_blocks", &CoreConfig::commit_blocks, 1, 8},
    {"cg_depth", &CoreConfig::cg_depth, 7, 40},
    {"inter_cluster_delay", &CoreConfig::inter_cluster_delay, 0, 8},
    {"ooo_issue_width", &CoreConfig::ooo_issue_width, 1, 8},
    {"ooo_window", &CoreConfig::ooo_window, 1, 1024},
    {"ooo_rob", &CoreConfig::ooo_rob, 1, 1024},
    {"ooo_regs", &CoreConfig::ooo_regs, 65, 4096},
    {"ooo_depth", &CoreConfig::ooo_depth, 7, 40},
    {"ino_issue_width", &CoreConfig::ino_issue_width, 1, 8},
    {"ino_iq", &CoreConfig::ino_iq, 1, 256},
    {"ino_regs", &CoreConfig::ino_regs, 64, 4096},
    {"ino_depth", &CoreConfig::ino_depth, 7, 40},
    {"lq_entries", &CoreConfig::lq_entries, 1, 1024},
    {"sq_entries", &CoreConfig::sq_entries, 1, 1024},
    {"l1_kb", &CoreConfig::l1_kb, 1, 1 << 16},
    {"l1_ways", &CoreConfig::l1_ways, 1, 64},
    {"l1_latency", &CoreConfig::l1_latency, 1, 1000},
    {"l2_kb", &CoreConfig::l2_kb, 1, 1 << 16},
    {"l2_ways", &CoreConfig::l2_ways, 1, 64},
    {"l2_latency", &CoreConfig::l2_latency, 1, 1000},
    {"l3_kb", &CoreConfig::l3_kb, 1, 1 << 20},
    {"l3_ways", &CoreConfig::l3_ways, 1, 64},
    {"l3_latency", &CoreConfig::l3_latency, 1, 1000},
    {"mem_latency", &CoreConfig::mem_latency, 1, 10000},
};

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

void CoreConfig::validate() const {
  for (const auto& f : kIntFields) {
    const int v = this->*f.field;
    if (v < f.min || v > f.max)
      throw ConfigError(std::string(f.name) + " = " + std::to_string(v) + " is outside [" +
                        std::to_string(f.min) + ", " + std::to_string(f.max) + "]");
  }
  if (total_bws() > 18)
    throw ConfigError("clusters * bws_per_cluster = " + std::to_string(total_bws()) +
                      " exceeds 18 block windows");
  if (grf_segments > grf_regs) throw ConfigError("more GRF segments than registers");
  if (!is_pow2(bpu_entries)) throw ConfigError("bpu_entries must be a power of two");
  if (btb_entries % btb_ways != 0 || !is_pow2(btb_entries / btb_ways))
    throw ConfigError("btb_entries / btb_ways must be a power of two");
  if (ooo_rob < ooo_window) throw ConfigError("ooo_rob must be >= ooo_window");
  auto check_cache = [](int kb, int ways, const char* name) {
    const int lines = kb * 1024 / 64;
    if (lines % ways != 0 || !is_pow2(lines / ways))
      throw ConfigError(std::string(name) + ": sets must be a power of two");
  };
  check_cache(l1_kb, l1_ways, "l1");
  check_cache(l2_kb, l2_ways, "l2");
  check_cache(l3_kb, l3_ways, "l3");
}

void CoreConfig::set(const std::string& key, const std::string& value) {
  if (key == "squash_drain_first") {
    if (value == "1" || value == "true")
      squash_drain_first = true;
    else if (value == "0" || value == "false")
      squash_drain_first = false;
    else
      throw ConfigError("squash_drain_first expects true/false");
    return;
  }
  if (key.rfind("energy.", 0) == 0) {
    try {
      energy.set(key.substr(7), value);
    } catch (const EnergyError& e) {
      throw ConfigError(e.what());
    }
    return;
  }
  for (const auto& f : kIntFields) {
    if (key != f.name) continue;
    int v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
      throw ConfigError(key + ": expected an integer, got '" + value + "'");
    this->*f.field = v;
    return;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

CoreConfig CoreConfig::from_string(std::string_view text) {
  CoreConfig c;
  for (const auto& [k, v] : parse_key_values(text)) c.set(k, v);
  c.validate();
  return c;
}

CoreConfig CoreConfig::from_file(const std::string& path) { return from_string(read_text_file(path)); }

std::map<std::string, std::string> CoreConfig::to_map() const {
  std::map<std::string, std::string> m;
  for (const auto& f : kIntFields) m[f.name] = std::to_string(this->*f.field);
  m["squash_drain_first"] = squash_drain_first ? "true" : "false";
  for (const auto& [k, v] : energy.to_map()) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    m["energy." + k] = s.str();
  }
  return m;
}

}  // namespace cgsim
