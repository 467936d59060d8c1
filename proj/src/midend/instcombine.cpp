#include <algorithm>
#include <unordered_set>

#include "rvx/midend.h"

namespace rvx {

namespace {

constexpr int kMaxIterations = 10;

bool is_not(const IrInst* d) {
  return d && d->op == Opcode::Xor && d->operands[1].is_const(-1);
}

const IrInst* inst_def(const IrFunction& f, const IrValue& v) { return f.def_of(v); }

class Combiner {
public:
  Combiner(IrFunction& f, PassStats& stats) : f_(f), stats_(stats) {}

  bool run_once() {
    bool changed = false;
    auto& insts = f_.body().insts;
    for (size_t i = 0; i < insts.size(); ++i) {
      if (visit(i)) {
        stats_.add("instcombine.insts-combined");
        changed = true;
      }
    }
    if (remove_dead_code(f_) > 0) changed = true;
    return changed;
  }

private:
  IrInst& at(size_t i) { return f_.body().insts[i]; }

  bool visit(size_t i) {
    if (canonicalize(i)) return true;
    if (fold_double_not(i)) return true;
    if (fold_and_of_xor(i)) return true;
    if (fold_gep_chain(i)) return true;
    if (match_funnel_shift(i)) return true;
    if (forward_load(i)) return true;
    return false;
  }

  // Constants go to the right-hand side of commutative operators.
  bool canonicalize(size_t i) {
    IrInst& inst = at(i);
    if (!is_commutative(inst.op)) return false;
    if (!inst.operands[0].is_const() || inst.operands[1].is_const()) return false;
    std::swap(inst.operands[0], inst.operands[1]);
    return true;
  }

  bool fold_double_not(size_t i) {
    IrInst& inst = at(i);
    if (inst.op != Opcode::Xor || !inst.operands[1].is_const(-1)) return false;
    const IrInst* inner = inst_def(f_, inst.operands[0]);
    if (!is_not(inner) || f_.use_count(inst.result()) == 0) return false;
    f_.replace_all_uses(inst.result(), inner->operands[0]);
    return true;
  }

  // and(xor(a, b), xor(b, -1)) -> and(a, xor(b, -1)), any operand order.
  bool fold_and_of_xor(size_t i) {
    IrInst& inst = at(i);
    if (inst.op != Opcode::And) return false;
    for (int p = 0; p < 2; ++p) {
      const IrInst* x = inst_def(f_, inst.operands[static_cast<size_t>(p)]);
      const IrInst* n = inst_def(f_, inst.operands[static_cast<size_t>(1 - p)]);
      if (!x || x->op != Opcode::Xor || !is_not(n) || is_not(x)) continue;
      const IrValue& b = n->operands[0];
      for (int q = 0; q < 2; ++q) {
        if (x->operands[static_cast<size_t>(q)] != b) continue;
        inst.operands[static_cast<size_t>(p)] = x->operands[static_cast<size_t>(1 - q)];
        return true;
      }
    }
    return false;
  }

  bool fold_gep_chain(size_t i) {
    IrInst& inst = at(i);
    if (inst.op != Opcode::Gep || !inst.operands[1].is_const()) return false;
    if (inst.operands[1].is_const(0)) {
      if (f_.use_count(inst.result()) == 0) return false;
      f_.replace_all_uses(inst.result(), inst.operands[0]);
      return true;
    }
    const IrInst* base = inst_def(f_, inst.operands[0]);
    if (!base || base->op != Opcode::Gep || !base->operands[1].is_const()) return false;
    int64_t sum = int64_t{base->operands[1].payload} + inst.operands[1].payload;
    if (!fits_signed(sum, 32)) return false;
    inst.operands[0] = base->operands[0];
    inst.operands[1] = IrValue::constant(static_cast<int32_t>(sum));
    return true;
  }

  // or(shl(x, c), lshr(y, 32 - c)) -> fshr(x, y, 32 - c). Both shifts must
  // have no other users, and the amounts must be constants summing to 32.
  bool match_funnel_shift(size_t i) {
    IrInst& inst = at(i);
    if (inst.op != Opcode::Or) return false;
    const IrInst* a = inst_def(f_, inst.operands[0]);
    const IrInst* b = inst_def(f_, inst.operands[1]);
    if (!a || !b) return false;
    if (a->op == Opcode::LShr) std::swap(a, b);
    if (a->op != Opcode::Shl || b->op != Opcode::LShr) return false;
    if (f_.use_count(a->result()) != 1 || f_.use_count(b->result()) != 1) return false;
    if (!a->operands[1].is_const() || !b->operands[1].is_const()) return false;
    int32_t cl = a->operands[1].payload;
    int32_t cr = b->operands[1].payload;
    if (cl <= 0 || cr <= 0 || cl + cr != 32) return false;
    IrValue x = a->operands[0];
    IrValue y = b->operands[0];
    inst.op = Opcode::Fshr;
    inst.operands = {x, y, IrValue::constant(cr)};
    return true;
  }

  // Reuses the most recent stored or loaded value at a provably identical
  // address, looking past accesses to provably different addresses.
  bool forward_load(size_t i) {
    IrInst& load = at(i);
    if (load.op != Opcode::Load || f_.use_count(load.result()) == 0) return false;
    const IrValue& addr = load.operands[0];
    for (size_t j = i; j-- > 0;) {
      const IrInst& prev = at(j);
      if (prev.op != Opcode::Store && prev.op != Opcode::Load) continue;
      const IrValue& other = prev.op == Opcode::Store ? prev.operands[1] : prev.operands[0];
      AliasResult r = alias(f_, addr, other);
      if (r == AliasResult::Different) continue;
      if (r == AliasResult::May) return false;
      IrValue v = prev.op == Opcode::Store ? prev.operands[0] : prev.result();
      if (v.type != load.type) return false;
      f_.replace_all_uses(load.result(), v);
      stats_.add("instcombine.loads-forwarded");
      return true;
    }
    return false;
  }

  IrFunction& f_;
  PassStats& stats_;
};

size_t erase_unused_loads(IrFunction& f) {
  std::unordered_set<int32_t> used;
  for (const auto& inst : f.body().insts)
    for (const auto& op : inst.operands)
      if (op.is_inst()) used.insert(op.payload);
  auto& insts = f.body().insts;
  size_t before = insts.size();
  std::erase_if(insts, [&](const IrInst& i) { return i.op == Opcode::Load && !used.count(i.id); });
  return before - insts.size();
}

}  // namespace

void pass_inst_combine(IrFunction& f, PassStats& stats) {
  Combiner c(f, stats);
  for (int it = 0; it < kMaxIterations; ++it) {
    stats.add("instcombine.iterations");
    bool changed = c.run_once();
    changed = erase_unused_loads(f) > 0 || changed;
    remove_dead_code(f);
    if (!changed) break;
  }
}

}  // namespace rvx
