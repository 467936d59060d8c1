#pragma once

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rvx/codegen.h"
#include "rvx/ir.h"
#include "rvx/isel.h"
#include "rvx/midend.h"
#include "rvx/sim.h"
#include "rvx/target.h"
#include "rvx/testkit.h"

namespace rvx {

struct CompileOptions {
  ExtensionSet exts = ExtensionSet::base_im();
  int opt_level = 2;  // 0: no midend passes, 2: default pipeline
  int zba_threshold = 2;
  bool debug_isel = false;
  std::optional<DagStage> dot_stage;
  std::optional<uint64_t> shuffle_seed;
};

struct CompiledFunction {
  MachineFunction mf;
  std::vector<std::string> isel_trace;
  std::string dot;
  RegAllocStats ra;
};

struct CompiledModule {
  IrModule ir;  // after the midend
  PassStats stats;
  std::vector<CompiledFunction> functions;
  ObjectCode object;
  std::vector<uint32_t> program;  // linked against the data layout

  const CompiledFunction* find(std::string_view name) const;
};

IrModule optimize(IrModule m, int opt_level, PassStats* stats = nullptr);

// parse -> verify -> opt(level) -> isel -> codegen -> emit.
CompiledModule compile(const IrModule& m, const TargetDesc& td, const CompileOptions& opts);
CompiledModule compile_text(std::string_view ir_text, std::string_view source_name, const TargetDesc& td,
                            const CompileOptions& opts);

// llc --emit=asm: each function with an entry-block comment, then data.
std::string asm_text(const CompiledModule& cm, const TargetDesc& td);
// llc --emit=obj: one word per line plus the relocation table.
std::string obj_text(const CompiledModule& cm);

// Printed mnemonics (aliases applied) of a function body -> count.
std::map<std::string, int> opcode_histogram(const MachineFunction& mf, const TargetDesc& td);

struct FunctionInputs {
  std::vector<uint32_t> args;
  Memory memory;
};

// Random i32 arguments; each pointer argument i gets its own buffer at
// arg_buffer_address(i) filled with random words. Globals keep their
// initializers.
FunctionInputs random_inputs(const IrModule& m, const IrFunction& f, std::mt19937& rng);

RunResult run_compiled(const CompiledModule& cm, const TargetDesc& td, std::string_view function,
                       const std::vector<uint32_t>& args, Memory mem, uint64_t fuel = kDefaultFuel,
                       bool keep_trace = false);

// The `rvx` command line, runnable in-process. args[0] is the subcommand.
// Returns 0 on success, 1 on input errors and 2 on usage errors.
int run_cli(const std::vector<std::string>& args, const std::string& in, std::string& out, std::string& err);
// Same, reading stdin only if a subcommand asks for it.
int run_cli(const std::vector<std::string>& args, const std::function<std::string()>& read_stdin, std::string& out,
            std::string& err);

// Adapter for run_lit and update_checks.
CommandRunner cli_runner();

}  // namespace rvx
