#include "cgsim/interpreter.hh"

#include <sstream>

namespace cgsim {

ArchState initial_state(const Program& p) {
  ArchState s;
  for (const auto& [r, v] : p.init_regs) s.regs[r] = v;
  for (const auto& [a, v] : p.init_memory)
    if (v != 0) s.memory[a] = v;
  return s;
}

namespace {

uint64_t load_word(const std::map<uint64_t, uint64_t>& mem, uint64_t addr) {
  auto it = mem.find(addr);
  return it == mem.end() ? 0 : it->second;
}

}  // namespace

std::vector<std::string> diff_states(const ArchState& expected, const ArchState& actual,
                                     const RegMask& regs) {
  std::vector<std::string> out;
  for (int r = 0; r < kArchGlobals; ++r) {
    if (!regs[r] || expected.regs[r] == actual.regs[r]) continue;
    std::ostringstream s;
    s << "g" << r << ": expected " << expected.regs[r] << ", got " << actual.regs[r];
    out.push_back(s.str());
  }
  for (const auto& [addr, v] : expected.memory) {
    const uint64_t w = load_word(actual.memory, addr);
    if (v == w) continue;
    std::ostringstream s;
    s << "mem[" << addr << "]: expected " << v << ", got " << w;
    out.push_back(s.str());
  }
  for (const auto& [addr, v] : actual.memory)
    if (v != 0 && !expected.memory.count(addr)) {
      std::ostringstream s;
      s << "mem[" << addr << "]: expected 0, got " << v;
      out.push_back(s.str());
    }
  return out;
}

uint64_t execute_block(const Program& p, size_t block, ArchState& state,
                       std::vector<StoreRecord>* stores) {
  std::array<uint64_t, kLrfSize> locals{};
  auto read = [&](const RegisterRef& r) {
    return r.scope == Scope::Local ? locals[r.index] : state.regs[r.index];
  };
  auto write = [&](const RegisterRef& r, uint64_t v) {
    if (r.scope == Scope::Local)
      locals[r.index] = v;
    else
      state.regs[r.index] = v;
  };

  const auto& b = p.blocks[block];
  uint64_t next = block + 1;
  for (const auto& inst : b.body) {
    const uint64_t a = inst.src[0] ? read(*inst.src[0]) : 0;
    const uint64_t bval =
        inst.src[1] ? read(*inst.src[1]) : static_cast<uint64_t>(inst.imm.value_or(0));
    switch (inst.op) {
      case Opcode::Lw:
        write(*inst.dest, load_word(state.memory, effective_address(a, inst.imm.value_or(0))));
        break;
      case Opcode::Sw: {
        const uint64_t addr = effective_address(a, inst.imm.value_or(0));
        if (bval == 0)
          state.memory.erase(addr);
        else
          state.memory[addr] = bval;
        if (stores) stores->push_back({addr, bval});
        break;
      }
      case Opcode::Beq:
      case Opcode::Bne:
      case Opcode::Blt:
      case Opcode::Jmp:
        if (branch_taken(inst.op, a, bval)) next = static_cast<uint64_t>(inst.target);
        break;
      case Opcode::Call:
        write(*inst.dest, block + 1);
        next = static_cast<uint64_t>(inst.target);
        break;
      case Opcode::Ret:
        next = a;
        break;
      case Opcode::Nop:
      case Opcode::Head:
        break;
      default:
        write(*inst.dest, alu_result(inst.op, a, bval));
        break;
    }
  }
  return next;
}

OracleTrace run_oracle(const Program& p, uint64_t max_instructions) {
  OracleTrace t;
  t.final_state = initial_state(p);
  uint64_t block = 0;
  while (block < p.blocks.size()) {
    if (t.instructions >= max_instructions) return t;
    t.path.push_back(static_cast<uint32_t>(block));
    t.instructions += p.blocks[block].body.size();
    block = execute_block(p, block, t.final_state, &t.stores);
  }
  t.finished = true;
  return t;
}

RegMask globals_used(const Program& p) {
  RegMask m;
  for (const auto& [r, v] : p.init_regs) m.set(r);
  for (const auto& b : p.blocks)
    for (const auto& inst : b.body) {
      if (inst.dest && inst.dest->scope == Scope::Global) m.set(inst.dest->index);
      for (const auto& s : inst.src)
        if (s && s->scope == Scope::Global) m.set(s->index);
    }
  return m;
}

}  // namespace cgsim
