// Text assembly (.casm) reader and writer.
//
//   ; comment (also '#')
//   .reg g1 4096            initial value of a global register
//   .word 0x1000 7          initial memory word at an aligned byte address
//   loop:                   label; starts a new block
//       head                block marker (fields after it are ignored)
//       add  r1, g1, g2     r = local register, g = global register
//       lw   r2, 8(r1)
//       sw   r2, 0(g3)
//       bne  r2, 0, loop    second operand may be an immediate
//
// Blocks start at labels, at `head` and after control ops. If the file
// contains any `head`, every block must start with one. Blocks longer than 32
// instructions are partitioned. Head metadata is always recomputed.

#ifndef CGSIM_ASSEMBLY_HH
#define CGSIM_ASSEMBLY_HH

#include <stdexcept>
#include <string>
#include <string_view>

#include "cgsim/isa.hh"

namespace cgsim {

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int col, const std::string& msg);
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

Program parse_program(std::string_view text);
std::string emit_program(const Program& p);

Program load_program_file(const std::string& path);
void save_program_file(const Program& p, const std::string& path);

}  // namespace cgsim

#endif  // CGSIM_ASSEMBLY_HH
