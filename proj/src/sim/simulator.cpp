#include <unordered_map>

#include <fmt/format.h>

#include "rvx/sim.h"

namespace rvx {

namespace {

enum class Sem : uint8_t {
  Lui, Addi, Xori, Ori, Andi, Slli, Srli, Srai, Add, Sub, Sll, Xor, Srl, Sra, Or, And,
  Lw, Sw, Jalr, Mul, Sh1add, Sh2add, Sh3add, Ror, Rori, Mla, Naxor, Shlxor, Lxr, Roti,
};

const std::unordered_map<std::string, Sem>& semantics() {
  static const std::unordered_map<std::string, Sem> table = {
      {"LUI", Sem::Lui}, {"ADDI", Sem::Addi}, {"XORI", Sem::Xori}, {"ORI", Sem::Ori},
      {"ANDI", Sem::Andi}, {"SLLI", Sem::Slli}, {"SRLI", Sem::Srli}, {"SRAI", Sem::Srai},
      {"ADD", Sem::Add}, {"SUB", Sem::Sub}, {"SLL", Sem::Sll}, {"XOR", Sem::Xor},
      {"SRL", Sem::Srl}, {"SRA", Sem::Sra}, {"OR", Sem::Or}, {"AND", Sem::And},
      {"LW", Sem::Lw}, {"SW", Sem::Sw}, {"JALR", Sem::Jalr}, {"MUL", Sem::Mul},
      {"SH1ADD", Sem::Sh1add}, {"SH2ADD", Sem::Sh2add}, {"SH3ADD", Sem::Sh3add},
      {"ROR", Sem::Ror}, {"RORI", Sem::Rori}, {"MLA", Sem::Mla}, {"NAXOR", Sem::Naxor},
      {"SHLXOR", Sem::Shlxor}, {"LXR", Sem::Lxr}, {"ROTI", Sem::Roti}};
  return table;
}

}  // namespace

void step(SimState& s, const TargetDesc& td, TraceStep* trace) {
  if (s.halted) throw Error("step on a halted machine");
  if (s.pc & 3u) throw Error(fmt::format("misaligned pc 0x{:08x}", s.pc));
  uint32_t word = s.mem.read32(s.pc);
  auto mi = td.decode(word, ExtensionSet::all());
  if (!mi) throw Error(fmt::format("undecodable word 0x{:08x} at pc 0x{:08x}", word, s.pc));
  const InstrDef& d = td.def(mi->def);
  auto sem_it = semantics().find(d.record);
  if (sem_it == semantics().end())
    throw Error(fmt::format("no semantics for {} at pc 0x{:08x}", d.mnemonic, s.pc));

  auto field = [&](Role r) -> int32_t {
    for (size_t k = 0; k < d.operands.size(); ++k)
      if (d.operands[k] == r) return mi->ops[k].value;
    return 0;
  };
  auto reg = [&](Role r) { return s.regs[static_cast<size_t>(field(r))]; };
  uint32_t rs1 = reg(Role::Rs1);
  uint32_t rs2 = reg(Role::Rs2);
  uint32_t rs3 = reg(Role::Rs3);
  uint32_t imm = static_cast<uint32_t>(d.format == FormatTag::U ? field(Role::Imm20)
                                       : d.format == FormatTag::IShift ? field(Role::Uimm5)
                                                                       : field(Role::Imm12));
  int rd = d.has_output ? field(Role::Rd) : -1;
  uint32_t next_pc = s.pc + 4;
  uint32_t result = 0;
  std::string effect;
  auto trap = [&](const std::exception& e) {
    throw Error(fmt::format("trap at pc 0x{:08x} ({}): {}", s.pc, format_asm(td, *mi, false), e.what()));
  };

  switch (sem_it->second) {
    case Sem::Lui: result = imm << 12; break;
    case Sem::Addi: result = rs1 + imm; break;
    case Sem::Xori: result = rs1 ^ imm; break;
    case Sem::Ori: result = rs1 | imm; break;
    case Sem::Andi: result = rs1 & imm; break;
    case Sem::Slli: result = rs1 << (imm & 31u); break;
    case Sem::Srli: result = rs1 >> (imm & 31u); break;
    case Sem::Srai: result = static_cast<uint32_t>(static_cast<int32_t>(rs1) >> (imm & 31u)); break;
    case Sem::Add: result = rs1 + rs2; break;
    case Sem::Sub: result = rs1 - rs2; break;
    case Sem::Sll: result = rs1 << (rs2 & 31u); break;
    case Sem::Xor: result = rs1 ^ rs2; break;
    case Sem::Srl: result = rs1 >> (rs2 & 31u); break;
    case Sem::Sra: result = static_cast<uint32_t>(static_cast<int32_t>(rs1) >> (rs2 & 31u)); break;
    case Sem::Or: result = rs1 | rs2; break;
    case Sem::And: result = rs1 & rs2; break;
    case Sem::Mul: result = rs1 * rs2; break;
    case Sem::Sh1add: result = (rs1 << 1) + rs2; break;
    case Sem::Sh2add: result = (rs1 << 2) + rs2; break;
    case Sem::Sh3add: result = (rs1 << 3) + rs2; break;
    case Sem::Ror: result = rotr32(rs1, rs2 & 31u); break;
    case Sem::Rori:
    case Sem::Roti: result = rotr32(rs1, imm & 31u); break;
    case Sem::Mla: result = rs1 * rs2 + rs3; break;
    case Sem::Naxor: result = (~rs1 & rs2) ^ rs3; break;
    case Sem::Shlxor: result = (rs1 << 1) ^ rs2; break;
    case Sem::Lw:
      try {
        result = s.mem.read32(rs1 + imm);
      } catch (const Error& e) {
        trap(e);
      }
      break;
    case Sem::Lxr:
      try {
        result = s.mem.read32(rs1) ^ s.mem.read32(rs2);
      } catch (const Error& e) {
        trap(e);
      }
      break;
    case Sem::Sw:
      try {
        s.mem.write32(rs1 + imm, rs2);
      } catch (const Error& e) {
        trap(e);
      }
      if (trace) effect = fmt::format("mem[0x{:08x}] <- 0x{:08x}", rs1 + imm, rs2);
      break;
    case Sem::Jalr:
      result = s.pc + 4;
      next_pc = (rs1 + imm) & ~1u;
      if (next_pc == kHaltSentinel) s.halted = true;
      break;
  }
  if (rd > 0) {
    s.regs[static_cast<size_t>(rd)] = result;
    if (trace) effect = fmt::format("{} <- 0x{:08x}", abi_reg_name(rd), result);
  }
  s.regs[0] = 0;
  if (trace) {
    trace->pc = s.pc;
    trace->text = format_asm(td, *mi);
    trace->effect = std::move(effect);
  }
  s.pc = next_pc;
}

RunResult run_function(const TargetDesc& td, const std::vector<uint32_t>& program, uint32_t entry,
                       const std::vector<uint32_t>& args, Memory mem, uint64_t fuel, bool keep_trace) {
  if (args.size() > 8) throw Error("at most 8 arguments are passed in registers");
  SimState s;
  s.mem = std::move(mem);
  for (size_t i = 0; i < program.size(); ++i) s.mem.write32(kTextBase + 4u * static_cast<uint32_t>(i), program[i]);
  for (size_t i = 0; i < args.size(); ++i) s.regs[kA0 + i] = args[i];
  s.regs[kSp] = kStackTop;
  s.regs[kRa] = kHaltSentinel;
  s.pc = entry;
  RunResult r;
  while (!s.halted) {
    if (r.steps >= fuel) throw Error(fmt::format("fuel exhausted after {} steps", r.steps));
    TraceStep t;
    step(s, td, keep_trace ? &t : nullptr);
    ++r.steps;
    if (keep_trace) r.trace.push_back(std::move(t));
  }
  r.ret = s.regs[kA0];
  r.memory = std::move(s.mem);
  return r;
}

}  // namespace rvx
