#include <fmt/format.h>

#include "rvx/ir.h"

namespace rvx {

std::string print_value(const IrFunction& f, const IrModule& m, const IrValue& v) {
  switch (v.kind) {
    case IrValue::Kind::Inst: {
      const IrInst* d = f.def_of(v);
      return d ? "%" + d->name : fmt::format("%<bad id {}>", v.payload);
    }
    case IrValue::Kind::Arg:
      if (v.payload >= 0 && static_cast<size_t>(v.payload) < f.params.size())
        return "%" + f.params[static_cast<size_t>(v.payload)].name;
      return fmt::format("%<bad arg {}>", v.payload);
    case IrValue::Kind::Global:
      if (v.payload >= 0 && static_cast<size_t>(v.payload) < m.globals.size())
        return "@" + m.globals[static_cast<size_t>(v.payload)].name;
      return fmt::format("@<bad global {}>", v.payload);
    case IrValue::Kind::Const:
      return std::to_string(v.payload);
    case IrValue::Kind::Undef:
      return "poison";
  }
  return "?";
}

namespace {

std::string typed(const IrFunction& f, const IrModule& m, const IrValue& v) {
  return fmt::format("{} {}", type_name(v.type), print_value(f, m, v));
}

std::string print_inst(const IrFunction& f, const IrModule& m, const IrInst& i) {
  std::string lhs = i.has_result() ? "%" + i.name + " = " : "";
  auto op = [&](size_t k) { return print_value(f, m, i.operands[k]); };
  switch (i.op) {
    case Opcode::Alloca:
      if (i.alloca_size == 4) return lhs + "alloca i32";
      return lhs + fmt::format("alloca [{} x i8]", i.alloca_size);
    case Opcode::Load:
      return lhs + fmt::format("load {}, {}", type_name(i.type), typed(f, m, i.operands[0]));
    case Opcode::Store:
      return fmt::format("store {}, {}", typed(f, m, i.operands[0]), typed(f, m, i.operands[1]));
    case Opcode::Gep:
      return lhs + fmt::format("getelementptr inbounds i8, {}, i32 {}", typed(f, m, i.operands[0]), op(1));
    case Opcode::Fshl:
    case Opcode::Fshr:
      return lhs + fmt::format("call i32 @llvm.{}.i32({}, {}, {})", opcode_name(i.op),
                               typed(f, m, i.operands[0]), typed(f, m, i.operands[1]),
                               typed(f, m, i.operands[2]));
    case Opcode::Ret:
      if (i.operands.empty()) return "ret void";
      return "ret " + typed(f, m, i.operands[0]);
    default:
      return lhs + fmt::format("{} {} {}, {}", opcode_name(i.op), type_name(i.type), op(0), op(1));
  }
}

}  // namespace

std::string print_ir(const IrModule& m) {
  std::string out;
  for (const auto& g : m.globals)
    out += fmt::format("@{} = global {} {}\n", g.name, type_name(g.value_type), g.initializer);
  bool uses_fshl = false;
  bool uses_fshr = false;
  for (const auto& f : m.functions) {
    if (!out.empty()) out += "\n";
    std::string params;
    for (const auto& p : f.params) {
      if (!params.empty()) params += ", ";
      params += fmt::format("{} %{}", type_name(p.type), p.name);
    }
    std::string attrs;
    for (const auto& a : f.attributes) attrs += " " + a;
    out += fmt::format("define {} @{}({}){} {{\n", type_name(f.return_type), f.name, params, attrs);
    for (const auto& b : f.blocks) {
      if (!b.label.empty()) out += b.label + ":\n";
      for (const auto& i : b.insts) {
        uses_fshl |= i.op == Opcode::Fshl;
        uses_fshr |= i.op == Opcode::Fshr;
        out += "  " + print_inst(f, m, i) + "\n";
      }
    }
    out += "}\n";
  }
  if (uses_fshl || uses_fshr) out += "\n";
  if (uses_fshl) out += "declare i32 @llvm.fshl.i32(i32, i32, i32)\n";
  if (uses_fshr) out += "declare i32 @llvm.fshr.i32(i32, i32, i32)\n";
  return out;
}

}  // namespace rvx
