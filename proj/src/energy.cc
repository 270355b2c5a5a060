#include "cgsim/energy.hh"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cgsim/keyvalue.hh"

namespace cgsim {

namespace {

struct ParamField {
  const char* name;
  double EnergyParams::*field;
};

constexpr ParamField kParamFields[] = {
    {"ram_pj_per_bit", &EnergyParams::ram_pj_per_bit},
    {"entry_exp", &EnergyParams::entry_exp},
    {"subarray_entries", &EnergyParams::subarray_entries},
    {"port_exp", &EnergyParams::port_exp},
    {"cam_pj_per_bit", &EnergyParams::cam_pj_per_bit},
    {"ff_pj_per_bit", &EnergyParams::ff_pj_per_bit},
    {"latch_bits", &EnergyParams::latch_bits},
    {"decode_pj", &EnergyParams::decode_pj},
    {"leak_pj_per_bit", &EnergyParams::leak_pj_per_bit},
    {"alu_pj", &EnergyParams::alu_pj},
    {"mul_pj", &EnergyParams::mul_pj},
    {"agu_pj", &EnergyParams::agu_pj},
    {"branch_pj", &EnergyParams::branch_pj},
    {"wire_pj_per_bit_mm", &EnergyParams::wire_pj_per_bit_mm},
    {"wire_activity", &EnergyParams::wire_activity},
    {"intra_cluster_mm", &EnergyParams::intra_cluster_mm},
    {"inter_cluster_mm", &EnergyParams::inter_cluster_mm},
    {"l1_pj", &EnergyParams::l1_pj},
    {"l2_pj", &EnergyParams::l2_pj},
    {"l3_pj", &EnergyParams::l3_pj},
    {"mem_pj", &EnergyParams::mem_pj},
    {"cache_leak_pj", &EnergyParams::cache_leak_pj},
};

}  // namespace

void EnergyParams::set(const std::string& key, const std::string& value) {
  for (const auto& f : kParamFields) {
    if (key != f.name) continue;
    size_t used = 0;
    double v = 0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size())
      throw EnergyError("energy parameter " + key + ": not a number");
    if (v < 0) throw EnergyError("energy parameter " + key + " must be >= 0");
    this->*f.field = v;
    return;
  }
  throw EnergyError("unknown energy parameter '" + key + "'");
}

EnergyParams EnergyParams::from_string(std::string_view text) {
  EnergyParams p;
  for (const auto& [key, value] : parse_key_values(text)) p.set(key, value);
  return p;
}

EnergyParams EnergyParams::from_file(const std::string& path) {
  return from_string(read_text_file(path));
}

std::map<std::string, double> EnergyParams::to_map() const {
  std::map<std::string, double> m;
  for (const auto& f : kParamFields) m[f.name] = this->*f.field;
  return m;
}

double access_energy(const TableDesc& t, const EnergyParams& p) {
  if (t.entries == 0) throw EnergyError("table with zero entries");
  const double ports = static_cast<double>(t.read_ports + t.write_ports);
  if (p.subarray_entries < 1) throw EnergyError("subarray_entries must be >= 1");
  const double rows = std::min(static_cast<double>(t.entries), p.subarray_entries);
  double e = p.ram_pj_per_bit * t.width_bits * std::pow(rows, p.entry_exp) *
             std::pow(ports, p.port_exp);
  if (t.kind == TableKind::Cam) e += cam_search_energy(t.entries, t.tag_bits, p);
  return e;
}

double cam_search_energy(uint32_t rows, uint32_t tag_bits, const EnergyParams& p) {
  return p.cam_pj_per_bit * tag_bits * rows;
}

double wire_energy(uint32_t bits, double length_mm, const EnergyParams& p) {
  return bits * length_mm * p.wire_pj_per_bit_mm * p.wire_activity;
}

double segment_access_energy(const TableDesc& unified, uint32_t segments, const EnergyParams& p) {
  if (segments == 0) throw EnergyError("zero GRF segments");
  return access_energy(unified, p) / segments;
}

double table_leakage(const TableDesc& t, const EnergyParams& p) {
  return p.leak_pj_per_bit * t.entries * t.width_bits;
}

std::string_view category_name(EnergyCategory c) {
  switch (c) {
    case EnergyCategory::FrontEnd: return "front_end";
    case EnergyCategory::Rename: return "rename";
    case EnergyCategory::Issue: return "issue";
    case EnergyCategory::RegisterFile: return "register_file";
    case EnergyCategory::Execute: return "execute";
    case EnergyCategory::Lsu: return "lsu";
    case EnergyCategory::Commit: return "commit";
    case EnergyCategory::Wire: return "wire";
    case EnergyCategory::Cache: return "cache";
  }
  return "?";
}

EnergyLedger::UnitId EnergyLedger::register_unit(const std::string& name, double access_pj,
                                                 double leak_pj_per_cycle,
                                                 EnergyCategory category) {
  for (const auto& u : units_)
    if (u.name == name) throw EnergyError("energy unit registered twice: " + name);
  if (access_pj < 0 || leak_pj_per_cycle < 0) throw EnergyError("negative energy for " + name);
  units_.push_back({name, access_pj, leak_pj_per_cycle, category, 0});
  return static_cast<UnitId>(units_.size() - 1);
}

EnergyLedger::UnitId EnergyLedger::find(std::string_view name) const {
  for (size_t i = 0; i < units_.size(); ++i)
    if (units_[i].name == name) return static_cast<UnitId>(i);
  throw EnergyError("unregistered energy unit: " + std::string(name));
}

void EnergyLedger::charge(std::string_view name, uint64_t accesses) { charge(find(name), accesses); }

uint64_t EnergyLedger::accesses(std::string_view name) const { return units_[find(name)].accesses; }

double EnergyLedger::dynamic_pj() const {
  double sum = 0;
  for (const auto& u : units_) sum += static_cast<double>(u.accesses) * u.access_pj;
  return sum;
}

double EnergyLedger::leakage_per_cycle_pj() const {
  double sum = 0;
  for (const auto& u : units_) sum += u.leak_pj_per_cycle;
  return sum;
}

double EnergyLedger::core_pj() const {
  double dyn = 0, leak = 0;
  for (const auto& u : units_) {
    if (u.category == EnergyCategory::Cache) continue;
    dyn += static_cast<double>(u.accesses) * u.access_pj;
    leak += u.leak_pj_per_cycle;
  }
  return dyn + static_cast<double>(cycles_) * leak;
}

std::string EnergyLedger::csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "unit,category,accesses,access_pj,dynamic_pj,leak_pj_per_cycle,leakage_pj\n";
  for (const auto& u : units_)
    out << u.name << ',' << category_name(u.category) << ',' << u.accesses << ',' << u.access_pj
        << ',' << static_cast<double>(u.accesses) * u.access_pj << ',' << u.leak_pj_per_cycle << ','
        << static_cast<double>(cycles_) * u.leak_pj_per_cycle << '\n';
  return out.str();
}

}  // namespace cgsim
