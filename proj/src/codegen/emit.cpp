#include <fmt/format.h>

#include "rvx/codegen.h"
#include "rvx/sim.h"

namespace rvx {

std::string print_function_asm(const MachineFunction& mf, const TargetDesc& td) {
  std::string out = mf.name + ":\n";
  for (const auto& mi : mf.instrs) out += "\t" + format_asm(td, mi) + "\n";
  return out;
}

std::string print_data_asm(const IrModule& m) {
  if (m.globals.empty()) return {};
  std::string out = "\t.data\n";
  for (const auto& g : m.globals)
    out += fmt::format("\t.globl\t{0}\n\t.p2align\t2\n{0}:\n\t.word\t{1}\n", g.name, g.initializer);
  return out;
}

std::string_view reloc_kind_name(RelocKind k) {
  switch (k) {
    case RelocKind::Hi20: return "R_RISCV_HI20";
    case RelocKind::Lo12I: return "R_RISCV_LO12_I";
    case RelocKind::Lo12S: return "R_RISCV_LO12_S";
  }
  return "?";
}

ObjectCode emit_object(const std::vector<MachineFunction>& fns, const TargetDesc& td) {
  ObjectCode obj;
  for (const auto& mf : fns) {
    obj.functions[mf.name] = static_cast<uint32_t>(obj.words.size() * 4);
    for (MachineInstr mi : mf.instrs) {
      uint32_t offset = static_cast<uint32_t>(obj.words.size() * 4);
      for (auto& op : mi.ops) {
        if (op.kind != MachineOperand::Kind::SymHi && op.kind != MachineOperand::Kind::SymLo) continue;
        RelocKind kind = RelocKind::Hi20;
        if (op.kind == MachineOperand::Kind::SymLo)
          kind = td.def(mi.def).format == FormatTag::S ? RelocKind::Lo12S : RelocKind::Lo12I;
        obj.relocations.push_back({offset, kind, op.symbol});
        op = MachineOperand::imm(0);
      }
      obj.words.push_back(td.encode(mi));
    }
  }
  return obj;
}

std::map<std::string, uint32_t> data_symbols(const IrModule& m) {
  std::map<std::string, uint32_t> out;
  for (size_t i = 0; i < m.globals.size(); ++i) out[m.globals[i].name] = global_address(static_cast<int>(i));
  return out;
}

std::vector<uint32_t> link(const ObjectCode& obj, const std::map<std::string, uint32_t>& symbols) {
  std::vector<uint32_t> words = obj.words;
  for (const auto& r : obj.relocations) {
    auto it = symbols.find(r.symbol);
    if (it == symbols.end()) throw Error(fmt::format("undefined symbol '{}'", r.symbol));
    uint32_t& w = words.at(r.offset / 4);
    uint32_t lo = static_cast<uint32_t>(lo12(it->second)) & 0xFFFu;
    switch (r.kind) {
      case RelocKind::Hi20:
        w = (w & 0xFFFu) | (hi20(it->second) << 12);
        break;
      case RelocKind::Lo12I:
        w = (w & 0x000FFFFFu) | (lo << 20);
        break;
      case RelocKind::Lo12S:
        w = (w & 0x01FFF07Fu) | ((lo >> 5) << 25) | ((lo & 0x1Fu) << 7);
        break;
    }
  }
  return words;
}

}  // namespace rvx
