#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rvx/common.h"

namespace rvx {

enum class Ext : uint8_t { I, M, Zba, Zbb, Xcrypt };

struct ExtensionSet {
  uint8_t bits = 1;  // I is always present

  bool has(Ext e) const { return bits & (1u << static_cast<unsigned>(e)); }
  void add(Ext e) { bits |= static_cast<uint8_t>(1u << static_cast<unsigned>(e)); }
  void remove(Ext e) {
    if (e != Ext::I) bits &= static_cast<uint8_t>(~(1u << static_cast<unsigned>(e)));
  }
  bool contains(ExtensionSet other) const { return (bits & other.bits) == other.bits; }
  bool operator==(const ExtensionSet&) const = default;

  static ExtensionSet base_im();
  static ExtensionSet all();
  // "+zba,-m,+xcrypt" applied on top of `base`. Throws Error on unknown names.
  static ExtensionSet parse_mattr(std::string_view mattr, ExtensionSet base = base_im());
  std::string to_string() const;
};

std::optional<Ext> ext_from_name(std::string_view name);
std::string_view ext_name(Ext e);

enum class Role : uint8_t { Rd, Rs1, Rs2, Rs3, Imm12, Imm20, Uimm5 };
enum class FormatTag : uint8_t { R, R4, I, IShift, S, U };

std::string_view role_name(Role r);
bool is_register_role(Role r);
std::string_view format_name(FormatTag f);

struct InstrDef {
  std::string record;    // "SH1ADD"
  std::string mnemonic;  // "sh1add"
  FormatTag format = FormatTag::R;
  uint32_t opcode = 0;
  uint32_t funct3 = 0;
  // funct7 (R), funct2 (R4) or the imm[11:7] selector (IShift).
  uint32_t funct_hi = 0;
  uint32_t match = 0;
  uint32_t mask = 0;
  std::vector<Role> operands;  // assembly order
  std::vector<Role> inputs;    // (ins ...) order, used by selection patterns
  bool has_output = false;
  bool memory_syntax = false;  // "$rd, ${imm12}(${rs1})"
  bool may_load = false;
  bool may_store = false;
  bool has_side_effects = false;
  bool commutable = false;
  std::vector<std::string> predicates;
  ExtensionSet required;
  std::vector<std::string> sched;
  int order = 0;
};

struct PatNode {
  enum class Kind : uint8_t { Op, Reg, Imm, Const };
  Kind kind = Kind::Op;
  std::string op;        // add, sub, mul, and, or, xor, shl, srl, sra, rotr, load
  bool one_use = false;  // from a hasOneUse() fragment
  std::string capture;   // Reg/Imm leaves
  std::string leaf_type; // GPR, non_imm12, simm12, uimmlog2xlen, uimm5
  int32_t value = 0;     // Const leaves
  std::vector<PatNode> kids;
};

struct OutNode {
  int def = -1;          // instruction index; -1 for a leaf
  std::string capture;
  bool as_imm = false;
  std::vector<OutNode> kids;
};

struct SelPattern {
  PatNode source;
  OutNode target;
  ExtensionSet required;
  int priority = 0;
  int order = 0;         // declaration order of the originating Pat
  int variant = 0;       // commuted variant index
  std::string text;      // source tree rendered for traces
};

struct MachineOperand {
  enum class Kind : uint8_t { VReg, PReg, Imm, FrameIndex, SymHi, SymLo };
  Kind kind = Kind::Imm;
  int32_t value = 0;   // register number, immediate or frame index / addend
  std::string symbol;  // SymHi / SymLo

  static MachineOperand vreg(int32_t n) { return {Kind::VReg, n, {}}; }
  static MachineOperand preg(int32_t n) { return {Kind::PReg, n, {}}; }
  static MachineOperand imm(int32_t v) { return {Kind::Imm, v, {}}; }
  static MachineOperand frame(int32_t fi) { return {Kind::FrameIndex, fi, {}}; }
  static MachineOperand sym_hi(std::string s) { return {Kind::SymHi, 0, std::move(s)}; }
  static MachineOperand sym_lo(std::string s) { return {Kind::SymLo, 0, std::move(s)}; }

  bool is_reg() const { return kind == Kind::VReg || kind == Kind::PReg; }
  bool operator==(const MachineOperand&) const = default;
};

struct MachineInstr {
  int def = -1;                    // index into TargetDesc::defs; -1 for a copy
  std::vector<MachineOperand> ops; // assembly order; copies are {dst, src}
  bool is_copy = false;

  bool operator==(const MachineInstr&) const = default;
};

// Linear machine code for one function, over virtual registers until
// register allocation and over physical ones afterwards.
struct MachineFunction {
  std::string name;
  std::vector<MachineInstr> instrs;
  std::vector<int32_t> frame_objects;  // byte sizes, indexed by frame index
  int32_t frame_size = 0;              // set by prologue/epilogue insertion
  bool is_leaf = true;
  int32_t num_vregs = 0;
};

class TargetDesc {
public:
  std::vector<InstrDef> defs;
  std::vector<SelPattern> patterns;  // sorted: priority desc, order asc, variant asc

  int find(std::string_view record) const;
  int find_mnemonic(std::string_view mnemonic) const;
  const InstrDef& def(int index) const { return defs.at(static_cast<size_t>(index)); }
  const InstrDef& def(std::string_view record) const;

  uint32_t encode(const MachineInstr& mi) const;
  std::optional<MachineInstr> decode(uint32_t word, ExtensionSet exts) const;

  // Every pair of defs whose encodings can match the same word.
  std::vector<std::pair<int, int>> collisions(ExtensionSet exts) const;
};

// Parses the description language documented in docs/target-desc.md.
TargetDesc load_target_desc(std::string_view text, std::string_view source_name = "<desc>");
// The description shipped in targets/rv32_xcrypt.desc, compiled into the binary.
std::string_view builtin_target_desc_text();
const TargetDesc& builtin_target();

// Register names.
std::string_view abi_reg_name(int reg);
std::optional<int> parse_reg_name(std::string_view name);
constexpr int kZero = 0, kRa = 1, kSp = 2, kA0 = 10;

// Assembly rendering. With aliases: li, mv, not, ret, nop.
std::string format_asm(const TargetDesc& td, const MachineInstr& mi, bool aliases = true);

struct AsmLine {
  MachineInstr mi;
  std::string text;  // source text, for diagnostics
  int line = 0;
};

// Assembles instructions (one per line; labels, directives and comments
// ignored). `li` expands through materialize_imm.
std::vector<AsmLine> assemble(const TargetDesc& td, std::string_view text, ExtensionSet exts,
                              std::string_view source_name = "<asm>");

// RV32 constant synthesis: ADDI, or LUI + ADDI, optionally replaced by a
// shorter SHxADD-based sequence when Zba is enabled and the base sequence is
// longer than `zba_threshold`. All instructions write `rd`; later ones read it.
std::vector<MachineInstr> materialize_imm(const TargetDesc& td, int32_t value, ExtensionSet exts,
                                          MachineOperand rd, int zba_threshold = 2);

// Upper/lower split used by %hi/%lo: hi = (v + 0x800) >> 12, lo = v - (hi << 12).
inline uint32_t hi20(uint32_t v) { return ((v + 0x800u) >> 12) & 0xFFFFFu; }
inline int32_t lo12(uint32_t v) { return sign_extend(v & 0xFFFu, 12); }

}  // namespace rvx
