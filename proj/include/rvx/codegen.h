#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvx/ir.h"
#include "rvx/target.h"

namespace rvx {

struct RegAllocOptions {
  // Permutes the allocation order; used to check results do not depend on
  // which registers happen to be chosen.
  std::optional<uint64_t> shuffle_seed;
};

struct RegAllocStats {
  int spilled = 0;
  std::vector<int> callee_saved;  // s-registers the function writes
};

// Linear scan over a0-a7, t0-t6, s1-s11. Spilled values go through t4-t6.
// Rewrites every virtual register to a physical one and drops identity copies.
RegAllocStats allocate_registers(MachineFunction& mf, const TargetDesc& td, const RegAllocOptions& opts = {});

// Lays out the frame (frame objects, then callee-saved registers), rewrites
// frame-index operands to sp offsets and brackets the body with sp updates.
void insert_prologue_epilogue(MachineFunction& mf, const TargetDesc& td, const RegAllocStats& ra);

// Copies become `mv`; throws if any virtual register remains.
void lower_copies(MachineFunction& mf, const TargetDesc& td);

std::string print_function_asm(const MachineFunction& mf, const TargetDesc& td);
std::string print_data_asm(const IrModule& m);

enum class RelocKind : uint8_t { Hi20, Lo12I, Lo12S };
std::string_view reloc_kind_name(RelocKind k);

struct Relocation {
  uint32_t offset = 0;  // byte offset into the text
  RelocKind kind = RelocKind::Hi20;
  std::string symbol;
};

struct ObjectCode {
  std::vector<uint32_t> words;
  std::map<std::string, uint32_t> functions;  // name -> byte offset
  std::vector<Relocation> relocations;
};

// Encodes functions back to back; symbol operands are left as zero and
// recorded as relocations.
ObjectCode emit_object(const std::vector<MachineFunction>& fns, const TargetDesc& td);

// Global name -> address under the fixed data layout.
std::map<std::string, uint32_t> data_symbols(const IrModule& m);

// Applies every relocation; throws on an undefined symbol.
std::vector<uint32_t> link(const ObjectCode& obj, const std::map<std::string, uint32_t>& symbols);

}  // namespace rvx
