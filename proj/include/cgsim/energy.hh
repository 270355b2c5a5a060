// Analytical energy model and the per-unit energy ledger.
//
// Table access energy (pJ):
//   ram_pj_per_bit * width * rows^entry_exp * (read_ports + write_ports)^port_exp
// where rows = min(entries, subarray_entries): larger tables are banked and an
// access reads one subarray.
// plus, for CAM tables, cam_pj_per_bit * tag_bits * entries for the match.
// Wires: bits * length_mm * wire_pj_per_bit_mm * wire_activity.

#ifndef CGSIM_ENERGY_HH
#define CGSIM_ENERGY_HH

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cgsim {

struct EnergyParams {
  double ram_pj_per_bit = 0.0002;
  double entry_exp = 1.0;
  double subarray_entries = 256;
  double port_exp = 0.6;
  double cam_pj_per_bit = 0.0005;
  double ff_pj_per_bit = 0.004;      // pipeline/stage latch per bit
  double latch_bits = 128;           // stage register bits per instruction
  double decode_pj = 5.0;
  double leak_pj_per_bit = 0.000002;  // storage leakage per bit per cycle
  double alu_pj = 3.0;
  double mul_pj = 12.0;
  double agu_pj = 2.0;
  double branch_pj = 2.0;
  double wire_pj_per_bit_mm = 0.08;
  double wire_activity = 0.5;
  double intra_cluster_mm = 0.5;
  double inter_cluster_mm = 2.0;
  double l1_pj = 20.0;
  double l2_pj = 60.0;
  double l3_pj = 180.0;
  double mem_pj = 800.0;
  double cache_leak_pj = 0.1;  // whole hierarchy, per cycle

  // Key = value file; unknown keys are an error.
  static EnergyParams from_file(const std::string& path);
  static EnergyParams from_string(std::string_view text);
  void set(const std::string& key, const std::string& value);
  std::map<std::string, double> to_map() const;
};

enum class TableKind { Ram, Cam };

struct TableDesc {
  uint32_t entries = 1;
  uint32_t width_bits = 64;
  uint32_t read_ports = 1;
  uint32_t write_ports = 1;
  TableKind kind = TableKind::Ram;
  uint32_t tag_bits = 0;  // CAM match width
};

class EnergyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double access_energy(const TableDesc& t, const EnergyParams& p);
// Energy of searching `rows` CAM rows of `tag_bits` each.
double cam_search_energy(uint32_t rows, uint32_t tag_bits, const EnergyParams& p);
double wire_energy(uint32_t bits, double length_mm, const EnergyParams& p);
// One access to one of `segments` equal slices of a unified register file.
double segment_access_energy(const TableDesc& unified, uint32_t segments, const EnergyParams& p);
double table_leakage(const TableDesc& t, const EnergyParams& p);

enum class EnergyCategory { FrontEnd, Rename, Issue, RegisterFile, Execute, Lsu, Commit, Wire, Cache };
std::string_view category_name(EnergyCategory c);

class EnergyLedger {
 public:
  using UnitId = int;

  UnitId register_unit(const std::string& name, double access_pj, double leak_pj_per_cycle,
                       EnergyCategory category);
  UnitId find(std::string_view name) const;  // throws EnergyError if unknown

  void charge(UnitId unit, uint64_t accesses = 1) { units_.at(unit).accesses += accesses; }
  void charge(std::string_view name, uint64_t accesses = 1);
  void tick(uint64_t cycles = 1) { cycles_ += cycles; }

  struct Unit {
    std::string name;
    double access_pj = 0;
    double leak_pj_per_cycle = 0;
    EnergyCategory category = EnergyCategory::Execute;
    uint64_t accesses = 0;
  };

  const std::vector<Unit>& units() const { return units_; }
  uint64_t cycles() const { return cycles_; }
  uint64_t accesses(std::string_view name) const;

  // Totals are evaluated in registration order so they are reproducible.
  double dynamic_pj() const;
  double leakage_per_cycle_pj() const;
  double leakage_pj() const { return static_cast<double>(cycles_) * leakage_per_cycle_pj(); }
  double total_pj() const { return dynamic_pj() + leakage_pj(); }
  // Same as total but excluding the cache hierarchy.
  double core_pj() const;

  std::string csv() const;

 private:
  std::vector<Unit> units_;
  uint64_t cycles_ = 0;
};

}  // namespace cgsim

#endif  // CGSIM_ENERGY_HH
