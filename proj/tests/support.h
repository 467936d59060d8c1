#pragma once

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rvx/driver.h"

#ifndef RVX_SOURCE_DIR
#error "RVX_SOURCE_DIR must point at the source tree"
#endif

namespace rvx::testing {

inline std::string source_path(std::string_view rel) { return std::string(RVX_SOURCE_DIR) + "/" + std::string(rel); }

inline std::string read_source(std::string_view rel) {
  std::ifstream in(source_path(rel), std::ios::binary);
  if (!in) throw Error("cannot open " + source_path(rel));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline IrModule load_corpus(std::string_view name) {
  return parse_ir(read_source("corpus/" + std::string(name)), name);
}

inline CompileOptions options(std::string_view mattr, int opt_level = 2) {
  CompileOptions o;
  o.exts = ExtensionSet::parse_mattr(mattr);
  o.opt_level = opt_level;
  return o;
}

inline CompiledModule compile_corpus(std::string_view name, std::string_view mattr, int opt_level = 2) {
  return compile(load_corpus(name), builtin_target(), options(mattr, opt_level));
}

// One instruction as printed, with the mnemonic/operand tab collapsed to a
// space so expectations read like the listings.
inline std::string asm_line(const MachineInstr& mi, bool aliases = true) {
  return collapse_ws(format_asm(builtin_target(), mi, aliases));
}

inline std::vector<std::string> body_lines(const MachineFunction& mf) {
  std::vector<std::string> out;
  for (const auto& mi : mf.instrs) out.push_back(asm_line(mi));
  return out;
}

inline std::vector<std::string> corpus_files() {
  return {"arith.ll", "diffusion.ll", "lxr.ll", "madd.ll", "rotimm.ll", "sbox.ll", "sbox_unopt.ll", "sh1add.ll",
          "shlxor.ll"};
}

// Mattr spellings for the extension subsets the differential oracle covers.
inline std::vector<std::string> extension_subsets() { return {"", "+zba", "+zbb", "+xcrypt", "+zba,+zbb,+xcrypt"}; }

// Result of running one function both ways on identical inputs.
struct Differential {
  bool equal = true;
  std::string detail;
};

inline Differential compare_run(const IrModule& source, const CompiledModule& cm, const IrFunction& f,
                                const FunctionInputs& in) {
  Differential d;
  auto want = ir_interpret(source, f, in.args, in.memory);
  auto got = run_compiled(cm, builtin_target(), f.name, in.args, in.memory);
  if (f.return_type != IrType::Void && want.ret.value_or(0) != got.ret) {
    d.equal = false;
    d.detail = "return value differs";
  }
  if (want.memory.observable() != got.memory.observable()) {
    d.equal = false;
    d.detail += d.detail.empty() ? "memory differs" : ", memory differs";
  }
  return d;
}

}  // namespace rvx::testing
