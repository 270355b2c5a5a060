#include "cgsim/compiler.hh"

#include <algorithm>
#include <array>
#include <numeric>

#include "cgsim/interpreter.hh"

namespace cgsim {

namespace {

using Regs = std::bitset<kArchGlobals>;

// Inserts a copy of block `bi`'s tail starting at `at` as a new block bi+1.
Program split_block(const Program& p, size_t bi, size_t at) {
  Program q = p;
  BasicBlock tail;
  tail.body.assign(p.blocks[bi].body.begin() + at, p.blocks[bi].body.end());
  q.blocks[bi].body.resize(at);
  q.blocks.insert(q.blocks.begin() + bi + 1, std::move(tail));
  for (auto& b : q.blocks)
    for (auto& inst : b.body)
      if (inst.target > static_cast<int32_t>(bi)) ++inst.target;
  return q;
}

std::vector<size_t> successors(const Program& p, size_t bi, bool& to_exit) {
  std::vector<size_t> out;
  to_exit = false;
  const auto& b = p.blocks[bi];
  auto add = [&](uint64_t s) {
    if (s >= p.blocks.size())
      to_exit = true;
    else
      out.push_back(s);
  };
  if (!b.ends_in_control()) {
    add(bi + 1);
    return out;
  }
  const auto& c = b.body.back();
  switch (ctrl_kind(c.op)) {
    case CtrlKind::Cond:
      add(static_cast<uint64_t>(c.target));
      add(bi + 1);
      break;
    case CtrlKind::Jump:
    case CtrlKind::Call:
      add(static_cast<uint64_t>(c.target));
      break;
    case CtrlKind::Return:
    case CtrlKind::None:
      to_exit = true;
      break;
  }
  return out;
}

// Renames source-level locals to globals the program does not use.
Program normalize_locals(const Program& p) {
  const RegMask used = globals_used(p);
  std::array<int, kLrfSize> map{};
  map.fill(-1);
  int next_free = 0;
  auto global_for = [&](uint8_t local) {
    if (map[local] < 0) {
      while (next_free < kArchGlobals && used[next_free]) ++next_free;
      if (next_free >= kArchGlobals)
        throw ProgramError("no free global register for local r" + std::to_string(local));
      map[local] = next_free++;
    }
    return RegisterRef::global(static_cast<uint8_t>(map[local]));
  };

  Program q = p;
  for (size_t bi = 0; bi < q.blocks.size(); ++bi) {
    std::bitset<kLrfSize> defined;
    for (auto& inst : q.blocks[bi].body) {
      for (auto& s : inst.src)
        if (s && s->scope == Scope::Local) {
          if (!defined[s->index])
            throw ProgramError("block " + std::to_string(bi) + ": local r" +
                               std::to_string(s->index) + " read before written");
          s = global_for(s->index);
        }
      if (inst.dest && inst.dest->scope == Scope::Local) {
        defined.set(inst.dest->index);
        inst.dest = global_for(inst.dest->index);
      }
    }
  }
  return q;
}

void classify_block(BasicBlock& b, const Regs& live_out, int max_locals) {
  const size_t n = b.body.size();
  std::array<int, kArchGlobals> last_def;
  last_def.fill(-1);
  for (size_t i = 0; i < n; ++i)
    if (b.body[i].dest) last_def[b.body[i].dest->index] = static_cast<int>(i);

  std::vector<bool> is_local(n, false);
  std::vector<int> uses(n, 0);
  std::vector<std::array<int, 2>> reaching(n, {-1, -1});
  std::array<int, kArchGlobals> cur;
  cur.fill(-1);
  for (size_t i = 0; i < n; ++i) {
    const auto& inst = b.body[i];
    for (int k = 0; k < 2; ++k)
      if (inst.src[k]) {
        reaching[i][k] = cur[inst.src[k]->index];
        if (reaching[i][k] >= 0) ++uses[reaching[i][k]];
      }
    if (inst.dest) {
      const uint8_t g = inst.dest->index;
      // g63 carries return addresses across calls; keep it global.
      is_local[i] = !(last_def[g] == static_cast<int>(i) && live_out[g]) && g != kLinkRegister;
      cur[g] = static_cast<int>(i);
    }
  }

  std::vector<int> locals;
  for (size_t i = 0; i < n; ++i)
    if (is_local[i]) locals.push_back(static_cast<int>(i));
  if (static_cast<int>(locals.size()) > max_locals) {
    std::vector<int> order = locals;
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
      if (uses[a] != uses[c]) return uses[a] < uses[c];
      return a > c;
    });
    const size_t spill = locals.size() - static_cast<size_t>(max_locals);
    for (size_t k = 0; k < spill; ++k) is_local[order[k]] = false;
  }

  std::vector<int> lrf(n, -1);
  int next = 0;
  for (size_t i = 0; i < n; ++i)
    if (is_local[i]) lrf[i] = next++;

  for (size_t i = 0; i < n; ++i) {
    auto& inst = b.body[i];
    for (int k = 0; k < 2; ++k) {
      const int d = reaching[i][k];
      if (d >= 0 && is_local[d]) inst.src[k] = RegisterRef::local(static_cast<uint8_t>(lrf[d]));
    }
    if (inst.dest && is_local[i]) inst.dest = RegisterRef::local(static_cast<uint8_t>(lrf[i]));
  }
}

bool is_load(const Instruction& i) { return i.op == Opcode::Lw; }

}  // namespace

Program partition_blocks(const Program& p, int max_size) {
  Program q;
  q.init_regs = p.init_regs;
  q.init_memory = p.init_memory;
  std::vector<int32_t> first(p.blocks.size());
  for (size_t bi = 0; bi < p.blocks.size(); ++bi) {
    const auto& b = p.blocks[bi];
    first[bi] = static_cast<int32_t>(q.blocks.size());
    size_t pos = 0;
    do {
      BasicBlock frag;
      if (pos == 0) frag.labels = b.labels;
      const size_t end = std::min(b.body.size(), pos + static_cast<size_t>(max_size));
      frag.body.assign(b.body.begin() + pos, b.body.begin() + end);
      q.blocks.push_back(std::move(frag));
      pos = end;
    } while (pos < b.body.size());
  }
  for (auto& b : q.blocks)
    for (auto& inst : b.body)
      if (inst.target >= 0 && static_cast<size_t>(inst.target) < first.size())
        inst.target = first[inst.target];
  finalize_program(q, p.has_heads);
  return q;
}

Liveness compute_liveness(const Program& p) {
  const size_t n = p.blocks.size();
  std::vector<Regs> use(n), def(n);
  for (size_t bi = 0; bi < n; ++bi)
    for (const auto& inst : p.blocks[bi].body) {
      for (const auto& s : inst.src)
        if (s && s->scope == Scope::Global && !def[bi][s->index]) use[bi].set(s->index);
      if (inst.dest && inst.dest->scope == Scope::Global) def[bi].set(inst.dest->index);
    }

  Liveness lv;
  lv.live_in.assign(n, Regs());
  lv.live_out.assign(n, Regs());
  Regs all;
  all.set();
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t k = n; k-- > 0;) {
      bool to_exit = false;
      Regs out;
      for (size_t s : successors(p, k, to_exit)) out |= lv.live_in[s];
      if (to_exit) out = all;
      const Regs in = use[k] | (out & ~def[k]);
      if (out != lv.live_out[k] || in != lv.live_in[k]) {
        lv.live_out[k] = out;
        lv.live_in[k] = in;
        changed = true;
      }
    }
  }
  return lv;
}

Program classify_registers(const Program& p, int max_locals) {
  Program q = normalize_locals(p);
  const Liveness lv = compute_liveness(q);
  for (size_t bi = 0; bi < q.blocks.size(); ++bi)
    classify_block(q.blocks[bi], lv.live_out[bi], max_locals);
  finalize_program(q, q.has_heads);
  return q;
}

DepGraph build_dep_graph(const BasicBlock& b) {
  const int n = static_cast<int>(b.body.size());
  DepGraph g;
  g.preds.assign(n, {});
  g.succs.assign(n, {});
  auto add = [&](int from, int to, DepGraph::Kind k) {
    g.edges.push_back({from, to, k});
    g.preds[to].push_back(from);
    g.succs[from].push_back(to);
  };
  for (int j = 0; j < n; ++j) {
    const auto& bj = b.body[j];
    bool raw_seen[2] = {false, false};
    for (int i = j - 1; i >= 0; --i) {
      const auto& bi = b.body[i];
      bool linked = false;
      for (int k = 0; k < 2; ++k)
        if (!raw_seen[k] && bj.src[k] && bi.dest && *bj.src[k] == *bi.dest) {
          raw_seen[k] = true;
          if (!linked) add(i, j, DepGraph::Kind::Raw);
          linked = true;
        }
      if (linked) continue;
      if (bj.dest && ((bi.src[0] && *bi.src[0] == *bj.dest) || (bi.src[1] && *bi.src[1] == *bj.dest))) {
        add(i, j, DepGraph::Kind::War);
        continue;
      }
      if (bj.dest && bi.dest && *bi.dest == *bj.dest) {
        add(i, j, DepGraph::Kind::Waw);
        continue;
      }
      if (is_memory(bi.op) && is_memory(bj.op) && (bi.op == Opcode::Sw || bj.op == Opcode::Sw)) {
        add(i, j, DepGraph::Kind::Mem);
        continue;
      }
      if (is_control(bj.op)) add(i, j, DepGraph::Kind::Ctrl);
    }
  }
  g.priority.assign(n, 0);
  for (int i = n - 1; i >= 0; --i) {
    int best = 0;
    for (int s : g.succs[i]) best = std::max(best, g.priority[s]);
    g.priority[i] = b.body[i].latency() + best;
  }
  return g;
}

BasicBlock list_schedule_block(const BasicBlock& b) {
  const DepGraph g = build_dep_graph(b);
  const int n = static_cast<int>(b.body.size());
  std::vector<int> remaining(n);
  for (int i = 0; i < n; ++i) remaining[i] = static_cast<int>(g.preds[i].size());
  std::vector<bool> done(n, false);
  std::vector<int> earliest(n, 0);

  // Cycle-driven: a node is ready once its predecessors are placed and their
  // results are available in the current issue cycle.
  BasicBlock out = b;
  out.body.clear();
  int now = 0;
  for (int step = 0; step < n; ++step) {
    int pick = -1, next_ready = -1;
    for (int i = 0; i < n; ++i) {
      if (done[i] || remaining[i] != 0) continue;
      if (earliest[i] > now) {
        if (next_ready < 0 || earliest[i] < next_ready) next_ready = earliest[i];
        continue;
      }
      if (pick < 0) {
        pick = i;
        continue;
      }
      if (g.priority[i] != g.priority[pick]) {
        if (g.priority[i] > g.priority[pick]) pick = i;
        continue;
      }
      if (is_load(b.body[i]) && !is_load(b.body[pick])) pick = i;
    }
    if (pick < 0) {
      if (next_ready < 0) throw ProgramError("dependency cycle in block");
      now = next_ready;
      --step;
      continue;
    }
    done[pick] = true;
    for (const auto& e : g.edges)
      if (e.from == pick) {
        const int lat = e.kind == DepGraph::Kind::Raw ? b.body[pick].latency() : 1;
        earliest[e.to] = std::max(earliest[e.to], now + lat);
        --remaining[e.to];
      }
    out.body.push_back(b.body[pick]);
    ++now;
  }
  return out;
}

int idealized_makespan(const BasicBlock& b, const DepGraph& g, const std::vector<int>& order) {
  std::vector<int> t(b.body.size(), -1);
  int prev = -1;
  int end = 0;
  for (int node : order) {
    int start = prev + 1;
    for (const auto& e : g.edges) {
      if (e.to != node) continue;
      const int lat = e.kind == DepGraph::Kind::Raw ? b.body[e.from].latency() : 1;
      start = std::max(start, t[e.from] + lat);
    }
    t[node] = start;
    prev = start;
    end = std::max(end, start + b.body[node].latency());
  }
  return end;
}

Program compile(const Program& source, const CompileOptions& opts) {
  Program p = partition_blocks(source, kMaxBlockSize);
  p.has_heads = false;
  for (auto& b : p.blocks) b.head.reset();
  p = normalize_locals(p);

  Program c;
  for (;;) {
    c = classify_registers(p, opts.max_locals);
    bool split = false;
    for (size_t bi = 0; bi < c.blocks.size() && !split; ++bi) {
      int writes = 0;
      const auto& body = c.blocks[bi].body;
      for (size_t i = 0; i < body.size(); ++i) {
        if (!body[i].dest || body[i].dest->scope != Scope::Global) continue;
        if (++writes > opts.max_global_writes) {
          p = split_block(p, bi, i);
          split = true;
          break;
        }
      }
    }
    if (!split) break;
  }

  if (opts.schedule)
    for (auto& b : c.blocks) b = list_schedule_block(b);
  finalize_program(c, true);
  validate_program(c);
  return c;
}

Program lower_for_baseline(const Program& p) {
  const RegMask used = globals_used(p);
  std::vector<uint8_t> free_regs;
  for (int r = 0; r < kArchGlobals; ++r)
    if (!used[r]) free_regs.push_back(static_cast<uint8_t>(r));

  Program q = p;
  auto lower = [&](std::optional<RegisterRef>& r) {
    if (!r || r->scope != Scope::Local) return;
    if (r->index >= free_regs.size())
      throw ProgramError("not enough free global registers to lower local r" +
                         std::to_string(r->index));
    r = RegisterRef::global(free_regs[r->index]);
  };
  for (auto& b : q.blocks)
    for (auto& inst : b.body) {
      lower(inst.dest);
      lower(inst.src[0]);
      lower(inst.src[1]);
    }
  finalize_program(q, false);
  return q;
}

}  // namespace cgsim
