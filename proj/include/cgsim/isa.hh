// Internal ISA, static program representation and code layout.
//
// A Program is an ordered list of basic blocks. In block form every block is
// preceded by a `head` instruction that carries the block metadata (HasCtrl,
// block size, control-op offset, fall-through offset). Baseline programs have
// the same blocks without heads.

#ifndef CGSIM_ISA_HH
#define CGSIM_ISA_HH

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cgsim {

inline constexpr int kLrfSize = 20;
inline constexpr int kArchGlobals = 64;
inline constexpr int kMaxBlockSize = 32;
inline constexpr int kMaxGlobalWrites = 8;
inline constexpr uint8_t kLinkRegister = 63;

enum class Opcode : uint8_t {
  Add, Sub, Mul, And, Or, Xor, Shl, Shr, Cmp, Mov, Li,
  Lw, Sw,
  Beq, Bne, Blt, Jmp, Call, Ret,
  Head, Nop,
};

std::string_view opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);

enum class CtrlKind : uint8_t { None, Cond, Jump, Call, Return };

CtrlKind ctrl_kind(Opcode op);
inline bool is_control(Opcode op) { return ctrl_kind(op) != CtrlKind::None; }
inline bool is_memory(Opcode op) { return op == Opcode::Lw || op == Opcode::Sw; }

// Issue-to-use latency assumed by the compiler and used for non-memory ops
// by the timing models. Loads report their real latency from the cache.
int latency_class(Opcode op);

enum class Scope : uint8_t { Local, Global };

struct RegisterRef {
  Scope scope = Scope::Global;
  uint8_t index = 0;

  // Register Rename Flag: only global operands visit the rename tables.
  bool rrf() const { return scope == Scope::Global; }

  static RegisterRef local(uint8_t i) { return {Scope::Local, i}; }
  static RegisterRef global(uint8_t i) { return {Scope::Global, i}; }

  friend bool operator==(const RegisterRef&, const RegisterRef&) = default;
  friend auto operator<=>(const RegisterRef&, const RegisterRef&) = default;
};

std::string to_string(const RegisterRef& r);

struct HeadMeta {
  bool has_ctrl = false;
  uint32_t blk_size = 0;
  uint32_t ctrl_offset = 0;
  uint32_t fall_through_offset = 0;

  friend bool operator==(const HeadMeta&, const HeadMeta&) = default;
};

// Operand conventions:
//   ALU:      dest, src[0], src[1] | imm
//   li:       dest, imm
//   mov:      dest, src[0]
//   lw:       dest, imm(src[0])
//   sw:       src[1] -> imm(src[0])
//   branches: src[0], src[1] | imm, target
//   call:     dest = g63 (return block index), target
//   ret:      src[0] = g63
struct Instruction {
  Opcode op = Opcode::Nop;
  std::optional<RegisterRef> dest;
  std::array<std::optional<RegisterRef>, 2> src;
  std::optional<int64_t> imm;
  int32_t target = -1;  // block index for beq/bne/blt/jmp/call
  uint32_t seq_id = 0;

  int latency() const { return latency_class(op); }
  int num_sources() const { return (src[0] ? 1 : 0) + (src[1] ? 1 : 0); }

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct BasicBlock {
  std::vector<std::string> labels;
  std::optional<Instruction> head;  // present in block form only
  HeadMeta meta;
  std::vector<Instruction> body;

  bool ends_in_control() const { return !body.empty() && is_control(body.back().op); }
  // Global architectural registers written by the block, in program order.
  std::vector<uint8_t> global_writes() const;

  friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

struct Program {
  std::vector<BasicBlock> blocks;
  bool has_heads = false;
  std::map<uint8_t, uint64_t> init_regs;     // global index -> value
  std::map<uint64_t, uint64_t> init_memory;  // aligned byte address -> word

  size_t instruction_count() const;  // body instructions, heads excluded
  int find_label(std::string_view label) const;

  friend bool operator==(const Program&, const Program&) = default;
};

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Recomputes head metadata and seq_ids from the block bodies. Adds heads when
// `with_heads` is set, strips them otherwise.
void finalize_program(Program& p, bool with_heads);

// Throws ProgramError if a block violates the block invariants.
void validate_program(const Program& p);

HeadMeta compute_head_meta(const BasicBlock& b);

// Mapping between static instruction slots (PCs) and blocks. PCs count
// instruction slots; a head occupies a slot.
class CodeLayout {
 public:
  explicit CodeLayout(const Program& p);

  static constexpr uint64_t kExitPc = ~uint64_t{0};

  uint64_t block_pc(size_t block) const { return block_start_[block]; }
  // PC of block `block`, or kExitPc when the index leaves the program.
  uint64_t block_pc_or_exit(uint64_t block) const;
  size_t num_blocks() const { return block_start_.size(); }
  uint64_t size() const { return total_; }
  bool has_heads() const { return has_heads_; }

  struct Slot {
    uint32_t block;
    int32_t offset;  // -1 for the head, else body index
  };
  Slot slot(uint64_t pc) const { return slots_[pc]; }
  // Slot PC of body instruction `index` of `block`.
  uint64_t body_pc(size_t block, size_t index) const {
    return block_start_[block] + (has_heads_ ? 1 : 0) + index;
  }
  uint64_t end_pc(size_t block) const;  // one past the last slot of block

 private:
  bool has_heads_;
  uint64_t total_ = 0;
  std::vector<uint64_t> block_start_;
  std::vector<Slot> slots_;
};

// Instruction semantics shared by every model.
uint64_t alu_result(Opcode op, uint64_t a, uint64_t b);
bool branch_taken(Opcode op, uint64_t a, uint64_t b);
// Loads and stores move aligned 64-bit words; the low three address bits are
// ignored.
inline uint64_t effective_address(uint64_t base, int64_t imm) {
  return (base + static_cast<uint64_t>(imm)) & ~uint64_t{7};
}

}  // namespace cgsim

#endif  // CGSIM_ISA_HH
