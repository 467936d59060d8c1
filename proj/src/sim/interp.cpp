#include <unordered_map>

#include <fmt/format.h>

#include "rvx/sim.h"

namespace rvx {

IrRunResult ir_interpret(const IrModule& m, const IrFunction& f, const std::vector<uint32_t>& args,
                         Memory mem) {
  if (args.size() != f.params.size())
    throw Error(fmt::format("@{} expects {} arguments, got {}", f.name, f.params.size(), args.size()));
  std::unordered_map<int32_t, uint32_t> vals;
  uint32_t sp = kStackTop;
  auto get = [&](const IrValue& v) -> uint32_t {
    switch (v.kind) {
      case IrValue::Kind::Inst: {
        auto it = vals.find(v.payload);
        if (it == vals.end()) throw Error(fmt::format("@{}: read of undefined value", f.name));
        return it->second;
      }
      case IrValue::Kind::Arg: return args.at(static_cast<size_t>(v.payload));
      case IrValue::Kind::Global:
        if (v.payload < 0 || static_cast<size_t>(v.payload) >= m.globals.size())
          throw Error(fmt::format("@{}: bad global reference", f.name));
        return global_address(v.payload);
      case IrValue::Kind::Const: return static_cast<uint32_t>(v.payload);
      case IrValue::Kind::Undef: throw Error(fmt::format("@{}: read of undefined value", f.name));
    }
    return 0;
  };
  auto shift_amount = [&](uint32_t s) {
    if (s >= 32) throw Error(fmt::format("@{}: shift amount {} is poison", f.name, s));
    return s;
  };
  for (const auto& inst : f.body().insts) {
    uint32_t r = 0;
    const auto& o = inst.operands;
    switch (inst.op) {
      case Opcode::Alloca:
        sp -= (static_cast<uint32_t>(inst.alloca_size) + 3u) & ~3u;
        if (sp < kStackLimit) throw Error("IR stack overflow");
        r = sp;
        break;
      case Opcode::Load: r = mem.read32(get(o[0])); break;
      case Opcode::Store: mem.write32(get(o[1]), get(o[0])); continue;
      case Opcode::Gep: r = get(o[0]) + get(o[1]); break;
      case Opcode::Add: r = get(o[0]) + get(o[1]); break;
      case Opcode::Sub: r = get(o[0]) - get(o[1]); break;
      case Opcode::Mul: r = get(o[0]) * get(o[1]); break;
      case Opcode::And: r = get(o[0]) & get(o[1]); break;
      case Opcode::Or: r = get(o[0]) | get(o[1]); break;
      case Opcode::Xor: r = get(o[0]) ^ get(o[1]); break;
      case Opcode::Shl: r = get(o[0]) << shift_amount(get(o[1])); break;
      case Opcode::LShr: r = get(o[0]) >> shift_amount(get(o[1])); break;
      case Opcode::AShr:
        r = static_cast<uint32_t>(static_cast<int32_t>(get(o[0])) >> shift_amount(get(o[1])));
        break;
      case Opcode::Fshl: {
        uint32_t a = get(o[0]), b = get(o[1]), c = get(o[2]) & 31u;
        r = c == 0 ? a : (a << c) | (b >> (32 - c));
        break;
      }
      case Opcode::Fshr: {
        uint32_t a = get(o[0]), b = get(o[1]), c = get(o[2]) & 31u;
        r = c == 0 ? b : (b >> c) | (a << (32 - c));
        break;
      }
      case Opcode::Ret:
        if (o.empty()) return {std::nullopt, std::move(mem)};
        return {get(o[0]), std::move(mem)};
    }
    vals[inst.id] = r;
  }
  throw Error(fmt::format("@{}: fell off the end of the block", f.name));
}

}  // namespace rvx
