#include "cgsim/assembly.hh"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cgsim/compiler.hh"

namespace cgsim {

ParseError::ParseError(int line, int col, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ", col " + std::to_string(col) +
                         ": " + msg),
      line_(line),
      col_(col) {}

namespace {

struct Token {
  std::string text;
  int col;
};

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

// Splits an operand list on commas, keeping column positions.
std::vector<Token> split_operands(std::string_view s, int base_col) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    size_t j = i;
    while (j < s.size() && s[j] != ',') ++j;
    size_t end = j;
    while (end > i && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    out.push_back({std::string(s.substr(i, end - i)), base_col + static_cast<int>(i)});
    i = j + 1;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Program run();

 private:
  struct PendingTarget {
    size_t block;
    size_t index;
    std::string label;
    int line;
    int col;
  };

  void parse_line(std::string_view line);
  void parse_directive(std::string_view rest, int col);
  void parse_instruction(std::string_view mnemonic, int col, std::string_view rest, int rest_col);

  RegisterRef parse_reg(const Token& t) const;
  int64_t parse_imm(const Token& t) const;
  bool looks_like_reg(std::string_view s) const;
  void parse_mem(const Token& t, Instruction& inst, int src_slot) const;

  void open_block();
  void close_block();
  [[noreturn]] void fail(int col, const std::string& msg) const { throw ParseError(line_no_, col, msg); }

  std::string_view text_;
  int line_no_ = 0;
  bool file_has_heads_ = false;

  Program prog_;
  BasicBlock cur_;
  bool cur_open_ = false;
  bool cur_has_head_ = false;
  bool after_control_ = false;
  int cur_start_line_ = 0;
  std::vector<PendingTarget> targets_;
};

bool Parser::looks_like_reg(std::string_view s) const {
  if (s.size() < 2 || (s[0] != 'r' && s[0] != 'g')) return false;
  for (size_t i = 1; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

RegisterRef Parser::parse_reg(const Token& t) const {
  if (!looks_like_reg(t.text)) fail(t.col, "expected register, got '" + t.text + "'");
  int idx = 0;
  std::from_chars(t.text.data() + 1, t.text.data() + t.text.size(), idx);
  if (t.text[0] == 'r') {
    if (idx >= kLrfSize) fail(t.col, "local register index out of range: " + t.text);
    return RegisterRef::local(static_cast<uint8_t>(idx));
  }
  if (idx >= kArchGlobals) fail(t.col, "global register index out of range: " + t.text);
  return RegisterRef::global(static_cast<uint8_t>(idx));
}

int64_t Parser::parse_imm(const Token& t) const {
  std::string_view s = t.text;
  bool neg = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  int base = 10;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    s.remove_prefix(2);
  }
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    fail(t.col, "expected immediate, got '" + t.text + "'");
  return neg ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
}

void Parser::parse_mem(const Token& t, Instruction& inst, int src_slot) const {
  const auto open = t.text.find('(');
  const auto close = t.text.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open ||
      close + 1 != t.text.size())
    fail(t.col, "expected memory operand imm(reg), got '" + t.text + "'");
  const std::string off = t.text.substr(0, open);
  inst.imm = off.empty() ? 0 : parse_imm({off, t.col});
  inst.src[src_slot] =
      parse_reg({t.text.substr(open + 1, close - open - 1), t.col + static_cast<int>(open) + 1});
}

void Parser::open_block() {
  cur_ = BasicBlock{};
  cur_open_ = true;
  cur_has_head_ = false;
  after_control_ = false;
  cur_start_line_ = line_no_;
}

void Parser::close_block() {
  if (!cur_open_) return;
  if (cur_.body.empty()) {
    if (cur_has_head_ || !cur_.labels.empty()) throw ParseError(cur_start_line_, 1, "empty block");
    cur_open_ = false;
    return;
  }
  if (file_has_heads_ && !cur_has_head_) throw ParseError(cur_start_line_, 1, "block without head");
  prog_.blocks.push_back(std::move(cur_));
  cur_open_ = false;
}

void Parser::parse_directive(std::string_view rest, int col) {
  std::istringstream in{std::string(rest)};
  std::string name, a, b;
  in >> name >> a >> b;
  if (name == ".reg") {
    const RegisterRef r = parse_reg({a, col});
    if (r.scope != Scope::Global) fail(col, ".reg takes a global register");
    prog_.init_regs[r.index] = static_cast<uint64_t>(parse_imm({b, col}));
  } else if (name == ".word") {
    const auto addr = static_cast<uint64_t>(parse_imm({a, col}));
    if (addr & 7) fail(col, ".word address must be 8-byte aligned");
    prog_.init_memory[addr] = static_cast<uint64_t>(parse_imm({b, col}));
  } else {
    fail(col, "unknown directive '" + name + "'");
  }
}

void Parser::parse_instruction(std::string_view mnemonic, int col, std::string_view rest,
                               int rest_col) {
  const auto op = opcode_from_name(mnemonic);
  if (!op) fail(col, "unknown mnemonic '" + std::string(mnemonic) + "'");

  if (*op == Opcode::Head) {
    if (cur_open_ && (!cur_.body.empty() || cur_has_head_)) close_block();
    if (!cur_open_ || after_control_) open_block();
    cur_has_head_ = true;
    cur_start_line_ = line_no_;
    return;
  }

  if (!cur_open_) {
    open_block();
  } else if (after_control_) {
    if (file_has_heads_) fail(col, "control op not last in block");
    close_block();
    open_block();
  }

  const auto ops = split_operands(rest, rest_col);
  auto want = [&](size_t n) {
    if (ops.size() != n)
      fail(col, std::string(mnemonic) + " expects " + std::to_string(n) + " operands, got " +
                    std::to_string(ops.size()));
  };
  auto reg_or_imm = [&](const Token& t, Instruction& inst) {
    if (looks_like_reg(t.text))
      inst.src[1] = parse_reg(t);
    else
      inst.imm = parse_imm(t);
  };

  Instruction inst;
  inst.op = *op;
  switch (*op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::And:
    case Opcode::Or: case Opcode::Xor: case Opcode::Shl: case Opcode::Shr:
    case Opcode::Cmp:
      want(3);
      inst.dest = parse_reg(ops[0]);
      inst.src[0] = parse_reg(ops[1]);
      reg_or_imm(ops[2], inst);
      break;
    case Opcode::Mov:
      want(2);
      inst.dest = parse_reg(ops[0]);
      inst.src[0] = parse_reg(ops[1]);
      break;
    case Opcode::Li:
      want(2);
      inst.dest = parse_reg(ops[0]);
      inst.imm = parse_imm(ops[1]);
      break;
    case Opcode::Lw:
      want(2);
      inst.dest = parse_reg(ops[0]);
      parse_mem(ops[1], inst, 0);
      break;
    case Opcode::Sw:
      want(2);
      inst.src[1] = parse_reg(ops[0]);
      parse_mem(ops[1], inst, 0);
      break;
    case Opcode::Beq: case Opcode::Bne: case Opcode::Blt:
      want(3);
      inst.src[0] = parse_reg(ops[0]);
      reg_or_imm(ops[1], inst);
      targets_.push_back({prog_.blocks.size(), cur_.body.size(), ops[2].text, line_no_, ops[2].col});
      break;
    case Opcode::Jmp: case Opcode::Call:
      want(1);
      targets_.push_back({prog_.blocks.size(), cur_.body.size(), ops[0].text, line_no_, ops[0].col});
      if (*op == Opcode::Call) inst.dest = RegisterRef::global(kLinkRegister);
      break;
    case Opcode::Ret:
      want(0);
      inst.src[0] = RegisterRef::global(kLinkRegister);
      break;
    case Opcode::Nop:
      want(0);
      break;
    case Opcode::Head:
      break;
  }
  cur_.body.push_back(inst);
  if (is_control(inst.op)) after_control_ = true;
}

void Parser::parse_line(std::string_view line) {
  size_t cut = line.find_first_of(";#");
  if (cut != std::string_view::npos) line = line.substr(0, cut);

  size_t i = 0;
  auto skip_ws = [&] {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  };
  skip_ws();
  if (i >= line.size()) return;

  if (line[i] == '.') {
    parse_directive(line.substr(i), static_cast<int>(i) + 1);
    return;
  }

  size_t j = i;
  while (j < line.size() && is_ident_char(line[j])) ++j;
  if (j == i) fail(static_cast<int>(i) + 1, "unexpected character '" + std::string(1, line[i]) + "'");
  std::string_view word = line.substr(i, j - i);

  if (j < line.size() && line[j] == ':') {
    const std::string label(word);
    for (const auto& b : prog_.blocks)
      for (const auto& l : b.labels)
        if (l == label) fail(static_cast<int>(i) + 1, "duplicate label '" + label + "'");
    for (const auto& l : cur_.labels)
      if (cur_open_ && l == label) fail(static_cast<int>(i) + 1, "duplicate label '" + label + "'");
    if (cur_open_ && (!cur_.body.empty() || cur_has_head_)) close_block();
    if (!cur_open_ || after_control_) open_block();
    cur_.labels.push_back(label);
    i = j + 1;
    skip_ws();
    if (i >= line.size()) return;
    j = i;
    while (j < line.size() && is_ident_char(line[j])) ++j;
    if (j == i) fail(static_cast<int>(i) + 1, "expected mnemonic");
    word = line.substr(i, j - i);
  }

  const int col = static_cast<int>(i) + 1;
  parse_instruction(word, col, line.substr(j), static_cast<int>(j) + 1);
}

Program Parser::run() {
  // Pre-scan: any `head` makes this a block-form file.
  {
    std::istringstream in{std::string(text_)};
    std::string line;
    while (std::getline(in, line)) {
      auto cut = line.find_first_of(";#");
      if (cut != std::string::npos) line.resize(cut);
      std::istringstream words(line);
      std::string w;
      while (words >> w) {
        if (w.back() == ':') continue;
        if (w == "head") file_has_heads_ = true;
        break;
      }
    }
  }

  size_t pos = 0;
  while (pos <= text_.size()) {
    size_t nl = text_.find('\n', pos);
    if (nl == std::string_view::npos) nl = text_.size();
    ++line_no_;
    parse_line(text_.substr(pos, nl - pos));
    pos = nl + 1;
  }
  ++line_no_;
  close_block();

  for (const auto& t : targets_) {
    const int idx = prog_.find_label(t.label);
    if (idx < 0) throw ParseError(t.line, t.col, "unknown label '" + t.label + "'");
    prog_.blocks[t.block].body[t.index].target = idx;
  }

  prog_ = partition_blocks(prog_, kMaxBlockSize);
  finalize_program(prog_, file_has_heads_);
  validate_program(prog_);
  return std::move(prog_);
}

std::string format_operand_b(const Instruction& inst) {
  if (inst.src[1]) return to_string(*inst.src[1]);
  return std::to_string(inst.imm.value_or(0));
}

}  // namespace

Program parse_program(std::string_view text) { return Parser(text).run(); }

std::string emit_program(const Program& p) {
  std::vector<std::string> names(p.blocks.size());
  for (size_t i = 0; i < p.blocks.size(); ++i)
    if (!p.blocks[i].labels.empty()) names[i] = p.blocks[i].labels.front();
  for (const auto& b : p.blocks)
    for (const auto& inst : b.body)
      if (inst.target >= 0 && names[inst.target].empty())
        names[inst.target] = "__b" + std::to_string(inst.target);

  std::ostringstream out;
  for (const auto& [r, v] : p.init_regs) out << ".reg g" << int(r) << ' ' << v << '\n';
  for (const auto& [a, v] : p.init_memory) out << ".word " << a << ' ' << v << '\n';

  for (size_t bi = 0; bi < p.blocks.size(); ++bi) {
    const auto& b = p.blocks[bi];
    if (b.labels.empty() && !names[bi].empty()) out << names[bi] << ":\n";
    for (const auto& l : b.labels) out << l << ":\n";
    if (p.has_heads) {
      const auto& m = b.meta;
      out << "    head has_ctrl=" << (m.has_ctrl ? 1 : 0) << " size=" << m.blk_size
          << " ctrl=" << m.ctrl_offset << " ft=" << m.fall_through_offset << '\n';
    }
    for (const auto& inst : b.body) {
      out << "    " << opcode_name(inst.op);
      switch (inst.op) {
        case Opcode::Mov:
          out << ' ' << to_string(*inst.dest) << ", " << to_string(*inst.src[0]);
          break;
        case Opcode::Li:
          out << ' ' << to_string(*inst.dest) << ", " << inst.imm.value_or(0);
          break;
        case Opcode::Lw:
          out << ' ' << to_string(*inst.dest) << ", " << inst.imm.value_or(0) << '('
              << to_string(*inst.src[0]) << ')';
          break;
        case Opcode::Sw:
          out << ' ' << to_string(*inst.src[1]) << ", " << inst.imm.value_or(0) << '('
              << to_string(*inst.src[0]) << ')';
          break;
        case Opcode::Beq: case Opcode::Bne: case Opcode::Blt:
          out << ' ' << to_string(*inst.src[0]) << ", " << format_operand_b(inst) << ", "
              << names[inst.target];
          break;
        case Opcode::Jmp: case Opcode::Call:
          out << ' ' << names[inst.target];
          break;
        case Opcode::Ret: case Opcode::Nop: case Opcode::Head:
          break;
        default:
          out << ' ' << to_string(*inst.dest) << ", " << to_string(*inst.src[0]) << ", "
              << format_operand_b(inst);
          break;
      }
      out << '\n';
    }
  }
  return out.str();
}

Program load_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

void save_program_file(const Program& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << emit_program(p);
}

}  // namespace cgsim
