#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "rvx/ir.h"

namespace rvx {
namespace {

class FunctionVerifier {
public:
  FunctionVerifier(const IrModule& m, const IrFunction& f, std::vector<Violation>& out)
      : m_(m), f_(f), out_(out) {}

  void run() {
    if (f_.blocks.size() != 1) {
      report(-1, "function must have exactly one basic block");
      return;
    }
    const auto& insts = f_.body().insts;
    if (insts.empty() || insts.back().op != Opcode::Ret) report(-1, "block must end in ret");
    std::unordered_map<int32_t, size_t> def_index;
    std::unordered_set<std::string> names;
    for (const auto& p : f_.params)
      if (!names.insert(p.name).second) report(-1, "duplicate name %" + p.name);
    for (size_t i = 0; i < insts.size(); ++i) {
      const IrInst& inst = insts[i];
      if (inst.has_result()) {
        if (def_index.count(inst.id)) report(i, fmt::format("duplicate id {}", inst.id));
        def_index[inst.id] = i;
        if (inst.name.empty()) report(i, "unnamed result");
        else if (!names.insert(inst.name).second) report(i, "duplicate name %" + inst.name);
      }
    }
    for (size_t i = 0; i < insts.size(); ++i) check_inst(i, insts[i], def_index);
  }

private:
  const IrModule& m_;
  const IrFunction& f_;
  std::vector<Violation>& out_;

  void report(long index, std::string rule) {
    out_.push_back({f_.name, static_cast<int>(index), std::move(rule)});
  }

  // Returns false when the operand itself is broken (already reported).
  bool check_operand(size_t i, const IrValue& v, const std::unordered_map<int32_t, size_t>& defs) {
    switch (v.kind) {
      case IrValue::Kind::Inst: {
        auto it = defs.find(v.payload);
        if (it == defs.end()) {
          report(static_cast<long>(i), "use of undefined value");
          return false;
        }
        const IrInst& d = f_.body().insts[it->second];
        if (it->second >= i) {
          report(static_cast<long>(i), "use before def: %" + d.name);
          return false;
        }
        if (d.type != v.type) {
          report(static_cast<long>(i), "operand type does not match definition of %" + d.name);
          return false;
        }
        return true;
      }
      case IrValue::Kind::Arg:
        if (v.payload < 0 || static_cast<size_t>(v.payload) >= f_.params.size()) {
          report(static_cast<long>(i), "argument index out of range");
          return false;
        }
        if (f_.params[static_cast<size_t>(v.payload)].type != v.type) {
          report(static_cast<long>(i), "operand type does not match argument");
          return false;
        }
        return true;
      case IrValue::Kind::Global:
        if (v.payload < 0 || static_cast<size_t>(v.payload) >= m_.globals.size()) {
          report(static_cast<long>(i), "global index out of range");
          return false;
        }
        return true;
      case IrValue::Kind::Const:
        return true;
      case IrValue::Kind::Undef:
        report(static_cast<long>(i), "use of poison value");
        return false;
    }
    return false;
  }

  void expect_type(size_t i, const IrValue& v, IrType t, std::string_view what) {
    if (v.type != t)
      report(static_cast<long>(i), fmt::format("{} must be {}", what, type_name(t)));
  }

  void check_inst(size_t i, const IrInst& inst, const std::unordered_map<int32_t, size_t>& defs) {
    for (const auto& op : inst.operands) check_operand(i, op, defs);
    auto arity = [&](size_t n) {
      if (inst.operands.size() == n) return true;
      report(static_cast<long>(i), fmt::format("{} expects {} operands", opcode_name(inst.op), n));
      return false;
    };
    if (inst.op == Opcode::Ret && i + 1 != f_.body().insts.size())
      report(static_cast<long>(i), "ret must be the last instruction");
    switch (inst.op) {
      case Opcode::Alloca:
        if (arity(0) && inst.alloca_size <= 0) report(static_cast<long>(i), "alloca size must be positive");
        if (inst.type != IrType::Ptr) report(static_cast<long>(i), "alloca result must be ptr");
        break;
      case Opcode::Load:
        if (arity(1)) expect_type(i, inst.operands[0], IrType::Ptr, "load address");
        if (inst.type == IrType::Void) report(static_cast<long>(i), "load result cannot be void");
        break;
      case Opcode::Store:
        if (arity(2)) {
          if (inst.operands[0].type == IrType::Void) report(static_cast<long>(i), "store value cannot be void");
          expect_type(i, inst.operands[1], IrType::Ptr, "store address");
        }
        if (inst.has_result()) report(static_cast<long>(i), "store does not produce a value");
        break;
      case Opcode::Gep:
        if (arity(2)) {
          expect_type(i, inst.operands[0], IrType::Ptr, "gep base");
          if (!inst.operands[1].is_const()) report(static_cast<long>(i), "gep offset must be a constant");
        }
        if (inst.type != IrType::Ptr) report(static_cast<long>(i), "gep result must be ptr");
        break;
      case Opcode::Fshl:
      case Opcode::Fshr:
        if (arity(3))
          for (const auto& op : inst.operands) expect_type(i, op, IrType::I32, "funnel shift operand");
        if (inst.type != IrType::I32) report(static_cast<long>(i), "funnel shift result must be i32");
        break;
      case Opcode::Ret:
        if (f_.return_type == IrType::Void) {
          arity(0);
        } else if (arity(1)) {
          expect_type(i, inst.operands[0], f_.return_type, "return value");
        }
        break;
      default:
        if (arity(2)) {
          expect_type(i, inst.operands[0], IrType::I32, "binary operand");
          expect_type(i, inst.operands[1], IrType::I32, "binary operand");
        }
        if (inst.type != IrType::I32) report(static_cast<long>(i), "binary result must be i32");
        break;
    }
  }
};

}  // namespace

std::vector<Violation> verify(const IrModule& m) {
  std::vector<Violation> out;
  std::unordered_set<std::string> names;
  for (const auto& g : m.globals) {
    if (!names.insert(g.name).second) out.push_back({"", -1, "duplicate global @" + g.name});
    if (g.value_type != IrType::I32) out.push_back({"", -1, "global @" + g.name + " must be i32"});
  }
  for (const auto& f : m.functions) {
    if (!names.insert(f.name).second) out.push_back({f.name, -1, "duplicate symbol @" + f.name});
    FunctionVerifier(m, f, out).run();
  }
  return out;
}

std::string format_violation(const Violation& v) {
  std::string where = v.function.empty() ? "module" : "@" + v.function;
  if (v.inst_index >= 0) where += fmt::format(": inst {}", v.inst_index);
  return where + ": " + v.rule;
}

}  // namespace rvx
