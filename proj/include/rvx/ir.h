#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rvx/common.h"

namespace rvx {

enum class IrType : uint8_t { Void, I32, Ptr };

std::string_view type_name(IrType t);

struct IrValue {
  enum class Kind : uint8_t { Inst, Arg, Global, Const, Undef };

  Kind kind = Kind::Const;
  // Instruction id, argument index, global index or the constant itself.
  int32_t payload = 0;
  IrType type = IrType::I32;

  static IrValue inst(int32_t id, IrType t) { return {Kind::Inst, id, t}; }
  static IrValue arg(int32_t index, IrType t) { return {Kind::Arg, index, t}; }
  static IrValue global(int32_t index) { return {Kind::Global, index, IrType::Ptr}; }
  static IrValue constant(int32_t v) { return {Kind::Const, v, IrType::I32}; }
  static IrValue undef(IrType t) { return {Kind::Undef, 0, t}; }

  bool is_const() const { return kind == Kind::Const; }
  bool is_const(int32_t v) const { return kind == Kind::Const && payload == v; }
  bool is_inst() const { return kind == Kind::Inst; }

  bool operator==(const IrValue&) const = default;
};

enum class Opcode : uint8_t {
  Alloca, Load, Store, Gep,
  Add, Sub, Mul, And, Or, Xor, Shl, LShr, AShr,
  Fshl, Fshr,
  Ret,
};

std::string_view opcode_name(Opcode op);
bool is_binary(Opcode op);
bool is_commutative(Opcode op);
// No memory effect and no side effect: safe to CSE and to delete when unused.
bool is_pure(Opcode op);

struct IrInst {
  int32_t id = -1;        // unique within the function; -1 for store/ret
  std::string name;       // result name without the sigil
  Opcode op = Opcode::Ret;
  std::vector<IrValue> operands;
  IrType type = IrType::Void;  // result type
  int32_t alloca_size = 0;     // bytes, alloca only

  bool has_result() const { return id >= 0; }
  IrValue result() const { return IrValue::inst(id, type); }
};

struct BasicBlock {
  std::string label;
  std::vector<IrInst> insts;  // terminator (ret) last
};

struct IrParam {
  std::string name;
  IrType type = IrType::I32;
};

struct IrFunction {
  std::string name;
  std::vector<IrParam> params;
  IrType return_type = IrType::Void;
  std::vector<BasicBlock> blocks;
  std::vector<std::string> attributes;
  int32_t next_id = 0;

  BasicBlock& body() { return blocks.front(); }
  const BasicBlock& body() const { return blocks.front(); }

  bool has_attribute(std::string_view tag) const;
  void add_attribute(std::string_view tag);

  // Index of the instruction defining `id` in the body, or -1.
  int index_of(int32_t id) const;
  const IrInst* def_of(const IrValue& v) const;

  // Allocates an id and a name unique within the function.
  int32_t fresh_id() { return next_id++; }
  std::string fresh_name(std::string_view base) const;

  void replace_all_uses(const IrValue& from, const IrValue& to);
  size_t use_count(const IrValue& v) const;
};

struct GlobalVar {
  std::string name;
  IrType value_type = IrType::I32;
  int32_t initializer = 0;
};

struct IrModule {
  std::vector<GlobalVar> globals;
  std::vector<IrFunction> functions;
  std::string source_name;

  const IrFunction* find_function(std::string_view name) const;
  IrFunction* find_function(std::string_view name);
  int find_global(std::string_view name) const;
};

struct ParseOptions {
  bool verify = true;
};

// Throws Error with "file:line:col: message" on malformed input.
IrModule parse_ir(std::string_view text, std::string_view source_name = "<input>",
                  ParseOptions opts = {});

std::string print_ir(const IrModule& m);
std::string print_value(const IrFunction& f, const IrModule& m, const IrValue& v);

struct Violation {
  std::string function;
  int inst_index = -1;
  std::string rule;
};

std::vector<Violation> verify(const IrModule& m);
std::string format_violation(const Violation& v);

// Structural equality: same globals, signatures, attributes and instruction
// sequences (operands compared by defining position, not by id).
bool structurally_equal(const IrModule& a, const IrModule& b);

}  // namespace rvx
