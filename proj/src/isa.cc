#include "cgsim/isa.hh"

#include <algorithm>

namespace cgsim {

namespace {

struct OpInfo {
  Opcode op;
  std::string_view name;
};

constexpr std::array<OpInfo, 21> kOps = {{
    {Opcode::Add, "add"},   {Opcode::Sub, "sub"}, {Opcode::Mul, "mul"},
    {Opcode::And, "and"},   {Opcode::Or, "or"},   {Opcode::Xor, "xor"},
    {Opcode::Shl, "shl"},   {Opcode::Shr, "shr"}, {Opcode::Cmp, "cmp"},
    {Opcode::Mov, "mov"},   {Opcode::Li, "li"},   {Opcode::Lw, "lw"},
    {Opcode::Sw, "sw"},     {Opcode::Beq, "beq"}, {Opcode::Bne, "bne"},
    {Opcode::Blt, "blt"},   {Opcode::Jmp, "jmp"}, {Opcode::Call, "call"},
    {Opcode::Ret, "ret"},   {Opcode::Head, "head"}, {Opcode::Nop, "nop"},
}};

}  // namespace

std::string_view opcode_name(Opcode op) {
  for (const auto& info : kOps)
    if (info.op == op) return info.name;
  return "?";
}

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (const auto& info : kOps)
    if (info.name == name) return info.op;
  return std::nullopt;
}

CtrlKind ctrl_kind(Opcode op) {
  switch (op) {
    case Opcode::Beq:
    case Opcode::Bne:
    case Opcode::Blt:
      return CtrlKind::Cond;
    case Opcode::Jmp:
      return CtrlKind::Jump;
    case Opcode::Call:
      return CtrlKind::Call;
    case Opcode::Ret:
      return CtrlKind::Return;
    default:
      return CtrlKind::None;
  }
}

int latency_class(Opcode op) {
  switch (op) {
    case Opcode::Mul:
      return 3;
    case Opcode::Lw:
      return 4;  // L1 hit
    default:
      return 1;
  }
}

std::string to_string(const RegisterRef& r) {
  return (r.scope == Scope::Local ? "r" : "g") + std::to_string(r.index);
}

std::vector<uint8_t> BasicBlock::global_writes() const {
  std::vector<uint8_t> out;
  for (const auto& inst : body)
    if (inst.dest && inst.dest->scope == Scope::Global) out.push_back(inst.dest->index);
  return out;
}

size_t Program::instruction_count() const {
  size_t n = 0;
  for (const auto& b : blocks) n += b.body.size();
  return n;
}

int Program::find_label(std::string_view label) const {
  for (size_t i = 0; i < blocks.size(); ++i)
    for (const auto& l : blocks[i].labels)
      if (l == label) return static_cast<int>(i);
  return -1;
}

HeadMeta compute_head_meta(const BasicBlock& b) {
  HeadMeta m;
  m.blk_size = static_cast<uint32_t>(b.body.size());
  m.has_ctrl = b.ends_in_control();
  m.ctrl_offset = m.has_ctrl ? m.blk_size : 0;
  m.fall_through_offset = 1 + m.blk_size;
  return m;
}

void finalize_program(Program& p, bool with_heads) {
  p.has_heads = with_heads;
  uint32_t seq = 0;
  for (auto& b : p.blocks) {
    b.meta = compute_head_meta(b);
    if (with_heads) {
      Instruction h;
      h.op = Opcode::Head;
      h.seq_id = seq++;
      b.head = h;
    } else {
      b.head.reset();
    }
    for (auto& inst : b.body) inst.seq_id = seq++;
  }
}

namespace {

void check_reg(const RegisterRef& r, size_t block, const char* what) {
  if (r.scope == Scope::Local && r.index >= kLrfSize)
    throw ProgramError("block " + std::to_string(block) + ": local register r" +
                       std::to_string(r.index) + " out of range in " + what);
  if (r.scope == Scope::Global && r.index >= kArchGlobals)
    throw ProgramError("block " + std::to_string(block) + ": global register g" +
                       std::to_string(r.index) + " out of range in " + what);
}

}  // namespace

void validate_program(const Program& p) {
  for (size_t bi = 0; bi < p.blocks.size(); ++bi) {
    const auto& b = p.blocks[bi];
    const std::string where = "block " + std::to_string(bi);
    if (b.body.empty()) throw ProgramError(where + ": empty block");
    if (b.body.size() > static_cast<size_t>(kMaxBlockSize))
      throw ProgramError(where + ": more than 32 instructions");
    if (p.has_heads != b.head.has_value())
      throw ProgramError(where + ": head presence does not match program form");
    if (b.head && (b.head->dest || b.head->src[0] || b.head->src[1]))
      throw ProgramError(where + ": head carries register operands");
    if (p.has_heads && !(b.meta == compute_head_meta(b)))
      throw ProgramError(where + ": stale head metadata");
    for (size_t i = 0; i < b.body.size(); ++i) {
      const auto& inst = b.body[i];
      if (inst.op == Opcode::Head) throw ProgramError(where + ": head inside block body");
      if (is_control(inst.op) && i + 1 != b.body.size())
        throw ProgramError(where + ": control op not last in block");
      if (inst.dest) check_reg(*inst.dest, bi, "dest");
      for (const auto& s : inst.src)
        if (s) check_reg(*s, bi, "source");
      switch (inst.op) {
        case Opcode::Lw:
          if (!inst.dest || !inst.src[0] || inst.src[1])
            throw ProgramError(where + ": lw needs a destination and one address register");
          break;
        case Opcode::Sw:
          if (inst.dest || !inst.src[0] || !inst.src[1])
            throw ProgramError(where + ": sw needs a data and an address register");
          break;
        case Opcode::Beq:
        case Opcode::Bne:
        case Opcode::Blt:
        case Opcode::Jmp:
        case Opcode::Call:
          if (inst.target < 0 || static_cast<size_t>(inst.target) >= p.blocks.size())
            throw ProgramError(where + ": branch target out of range");
          break;
        default:
          break;
      }
      if (inst.op == Opcode::Call && inst.dest != RegisterRef::global(kLinkRegister))
        throw ProgramError(where + ": call must write g63");
      if (inst.op == Opcode::Ret && inst.src[0] != RegisterRef::global(kLinkRegister))
        throw ProgramError(where + ": ret must read g63");
    }
  }
}

CodeLayout::CodeLayout(const Program& p) : has_heads_(p.has_heads) {
  block_start_.reserve(p.blocks.size());
  for (size_t bi = 0; bi < p.blocks.size(); ++bi) {
    block_start_.push_back(total_);
    if (has_heads_) slots_.push_back({static_cast<uint32_t>(bi), -1});
    for (size_t i = 0; i < p.blocks[bi].body.size(); ++i)
      slots_.push_back({static_cast<uint32_t>(bi), static_cast<int32_t>(i)});
    total_ = slots_.size();
  }
}

uint64_t CodeLayout::block_pc_or_exit(uint64_t block) const {
  return block < block_start_.size() ? block_start_[block] : kExitPc;
}

uint64_t CodeLayout::end_pc(size_t block) const {
  return block + 1 < block_start_.size() ? block_start_[block + 1] : total_;
}

uint64_t alu_result(Opcode op, uint64_t a, uint64_t b) {
  switch (op) {
    case Opcode::Add: return a + b;
    case Opcode::Sub: return a - b;
    case Opcode::Mul: return a * b;
    case Opcode::And: return a & b;
    case Opcode::Or: return a | b;
    case Opcode::Xor: return a ^ b;
    case Opcode::Shl: return a << (b & 63);
    case Opcode::Shr: return a >> (b & 63);
    case Opcode::Cmp: {
      const auto sa = static_cast<int64_t>(a), sb = static_cast<int64_t>(b);
      return sa == sb ? 0 : (sa < sb ? ~uint64_t{0} : 1);
    }
    case Opcode::Mov: return a;
    case Opcode::Li: return b;
    default: return 0;
  }
}

bool branch_taken(Opcode op, uint64_t a, uint64_t b) {
  switch (op) {
    case Opcode::Beq: return a == b;
    case Opcode::Bne: return a != b;
    case Opcode::Blt: return static_cast<int64_t>(a) < static_cast<int64_t>(b);
    case Opcode::Jmp:
    case Opcode::Call:
    case Opcode::Ret:
      return true;
    default:
      return false;
  }
}

}  // namespace cgsim
