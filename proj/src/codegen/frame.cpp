#include <fmt/format.h>

#include "rvx/codegen.h"

namespace rvx {

namespace {

MachineInstr make(const TargetDesc& td, std::string_view record, std::initializer_list<MachineOperand> ops) {
  return {td.find(record), ops, false};
}

// SW/LW operands in assembly order: {reg, imm, base}.
MachineInstr sp_access(const TargetDesc& td, std::string_view record, int reg, int32_t offset) {
  return make(td, record, {MachineOperand::preg(reg), MachineOperand::imm(offset), MachineOperand::preg(kSp)});
}

bool is_return(const TargetDesc& td, const MachineInstr& mi) {
  return !mi.is_copy && td.def(mi.def).record == "JALR" && mi.ops[0] == MachineOperand::preg(kZero) &&
         mi.ops[2] == MachineOperand::preg(kRa);
}

}  // namespace

void insert_prologue_epilogue(MachineFunction& mf, const TargetDesc& td, const RegAllocStats& ra) {
  std::vector<int32_t> offsets;
  int32_t size = 0;
  for (int32_t bytes : mf.frame_objects) {
    offsets.push_back(size);
    size += (bytes + 3) & ~3;
  }
  std::vector<int32_t> save_at;
  for (size_t i = 0; i < ra.callee_saved.size(); ++i) {
    save_at.push_back(size);
    size += 4;
  }
  mf.frame_size = (size + 15) & ~15;
  if (mf.frame_size > 2047) throw Error(fmt::format("@{}: frame of {} bytes is too large", mf.name, mf.frame_size));

  for (auto& mi : mf.instrs)
    for (auto& op : mi.ops)
      if (op.kind == MachineOperand::Kind::FrameIndex) {
        if (op.value < 0 || static_cast<size_t>(op.value) >= offsets.size())
          throw Error(fmt::format("@{}: unknown frame index {}", mf.name, op.value));
        op = MachineOperand::imm(offsets[static_cast<size_t>(op.value)]);
      }
  if (mf.frame_size == 0) return;

  std::vector<MachineInstr> out;
  out.push_back(make(td, "ADDI", {MachineOperand::preg(kSp), MachineOperand::preg(kSp),
                                  MachineOperand::imm(-mf.frame_size)}));
  for (size_t i = 0; i < ra.callee_saved.size(); ++i)
    out.push_back(sp_access(td, "SW", ra.callee_saved[i], save_at[i]));
  for (auto& mi : mf.instrs) {
    if (is_return(td, mi)) {
      for (size_t i = 0; i < ra.callee_saved.size(); ++i)
        out.push_back(sp_access(td, "LW", ra.callee_saved[i], save_at[i]));
      out.push_back(make(td, "ADDI", {MachineOperand::preg(kSp), MachineOperand::preg(kSp),
                                      MachineOperand::imm(mf.frame_size)}));
    }
    out.push_back(std::move(mi));
  }
  mf.instrs = std::move(out);
}

void lower_copies(MachineFunction& mf, const TargetDesc& td) {
  for (auto& mi : mf.instrs) {
    for (const auto& op : mi.ops)
      if (op.kind == MachineOperand::Kind::VReg)
        throw Error(fmt::format("@{}: virtual register %v{} survived allocation", mf.name, op.value));
    if (!mi.is_copy) continue;
    mi = make(td, "ADDI", {mi.ops[0], mi.ops[1], MachineOperand::imm(0)});
  }
}

}  // namespace rvx
