#include "rvx/ir.h"

#include <algorithm>
#include <unordered_set>

namespace rvx {

std::string_view type_name(IrType t) {
  switch (t) {
    case IrType::Void: return "void";
    case IrType::I32: return "i32";
    case IrType::Ptr: return "ptr";
  }
  return "?";
}

std::string_view opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Alloca: return "alloca";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Gep: return "getelementptr";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::And: return "and";
    case Opcode::Or: return "or";
    case Opcode::Xor: return "xor";
    case Opcode::Shl: return "shl";
    case Opcode::LShr: return "lshr";
    case Opcode::AShr: return "ashr";
    case Opcode::Fshl: return "fshl";
    case Opcode::Fshr: return "fshr";
    case Opcode::Ret: return "ret";
  }
  return "?";
}

bool is_binary(Opcode op) {
  switch (op) {
    case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::And:
    case Opcode::Or: case Opcode::Xor: case Opcode::Shl: case Opcode::LShr:
    case Opcode::AShr:
      return true;
    default:
      return false;
  }
}

bool is_commutative(Opcode op) {
  switch (op) {
    case Opcode::Add: case Opcode::Mul: case Opcode::And: case Opcode::Or:
    case Opcode::Xor:
      return true;
    default:
      return false;
  }
}

bool is_pure(Opcode op) {
  return is_binary(op) || op == Opcode::Gep || op == Opcode::Fshl || op == Opcode::Fshr;
}

bool IrFunction::has_attribute(std::string_view tag) const {
  return std::find(attributes.begin(), attributes.end(), tag) != attributes.end();
}

void IrFunction::add_attribute(std::string_view tag) {
  if (!has_attribute(tag)) attributes.emplace_back(tag);
}

int IrFunction::index_of(int32_t id) const {
  const auto& insts = body().insts;
  for (size_t i = 0; i < insts.size(); ++i)
    if (insts[i].id == id) return static_cast<int>(i);
  return -1;
}

const IrInst* IrFunction::def_of(const IrValue& v) const {
  if (!v.is_inst()) return nullptr;
  int i = index_of(v.payload);
  return i < 0 ? nullptr : &body().insts[static_cast<size_t>(i)];
}

std::string IrFunction::fresh_name(std::string_view base) const {
  std::unordered_set<std::string> used;
  for (const auto& p : params) used.insert(p.name);
  for (const auto& b : blocks)
    for (const auto& i : b.insts)
      if (!i.name.empty()) used.insert(i.name);
  std::string candidate(base);
  for (int n = 1; used.count(candidate); ++n) candidate = std::string(base) + std::to_string(n);
  return candidate;
}

void IrFunction::replace_all_uses(const IrValue& from, const IrValue& to) {
  for (auto& b : blocks)
    for (auto& i : b.insts)
      for (auto& op : i.operands)
        if (op == from) op = to;
}

size_t IrFunction::use_count(const IrValue& v) const {
  size_t n = 0;
  for (const auto& b : blocks)
    for (const auto& i : b.insts)
      n += static_cast<size_t>(std::count(i.operands.begin(), i.operands.end(), v));
  return n;
}

const IrFunction* IrModule::find_function(std::string_view name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

IrFunction* IrModule::find_function(std::string_view name) {
  for (auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

int IrModule::find_global(std::string_view name) const {
  for (size_t i = 0; i < globals.size(); ++i)
    if (globals[i].name == name) return static_cast<int>(i);
  return -1;
}

namespace {

bool same_value(const IrFunction& fa, const IrValue& a, const IrFunction& fb, const IrValue& b) {
  if (a.kind != b.kind || a.type != b.type) return false;
  if (a.kind == IrValue::Kind::Inst) return fa.index_of(a.payload) == fb.index_of(b.payload);
  return a.payload == b.payload;
}

bool same_function(const IrFunction& a, const IrFunction& b) {
  if (a.name != b.name || a.return_type != b.return_type || a.attributes != b.attributes)
    return false;
  if (a.params.size() != b.params.size() || a.blocks.size() != b.blocks.size()) return false;
  for (size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].name != b.params[i].name || a.params[i].type != b.params[i].type) return false;
  for (size_t bi = 0; bi < a.blocks.size(); ++bi) {
    const auto& ia = a.blocks[bi].insts;
    const auto& ib = b.blocks[bi].insts;
    if (a.blocks[bi].label != b.blocks[bi].label || ia.size() != ib.size()) return false;
    for (size_t i = 0; i < ia.size(); ++i) {
      const IrInst& x = ia[i];
      const IrInst& y = ib[i];
      if (x.op != y.op || x.name != y.name || x.type != y.type ||
          x.alloca_size != y.alloca_size || x.has_result() != y.has_result() ||
          x.operands.size() != y.operands.size())
        return false;
      for (size_t k = 0; k < x.operands.size(); ++k)
        if (!same_value(a, x.operands[k], b, y.operands[k])) return false;
    }
  }
  return true;
}

}  // namespace

bool structurally_equal(const IrModule& a, const IrModule& b) {
  if (a.globals.size() != b.globals.size() || a.functions.size() != b.functions.size())
    return false;
  for (size_t i = 0; i < a.globals.size(); ++i) {
    const auto& x = a.globals[i];
    const auto& y = b.globals[i];
    if (x.name != y.name || x.value_type != y.value_type || x.initializer != y.initializer)
      return false;
  }
  for (size_t i = 0; i < a.functions.size(); ++i)
    if (!same_function(a.functions[i], b.functions[i])) return false;
  return true;
}

}  // namespace rvx
