#include <fmt/format.h>

#include "rvx/driver.h"

namespace rvx {

const CompiledFunction* CompiledModule::find(std::string_view name) const {
  for (const auto& f : functions)
    if (f.mf.name == name) return &f;
  return nullptr;
}

IrModule optimize(IrModule m, int opt_level, PassStats* stats) {
  if (opt_level == 0) return m;
  return run_pipeline(std::move(m), default_pipeline(), stats);
}

CompiledModule compile(const IrModule& m, const TargetDesc& td, const CompileOptions& opts) {
  CompiledModule cm;
  cm.ir = optimize(m, opts.opt_level, &cm.stats);
  IselOptions io;
  io.exts = opts.exts;
  io.zba_threshold = opts.zba_threshold;
  io.trace = opts.debug_isel;
  std::vector<MachineFunction> fns;
  for (const auto& f : cm.ir.functions) {
    CompiledFunction cf;
    auto res = run_isel(f, cm.ir, td, io, opts.dot_stage);
    cf.mf = std::move(res.mf);
    cf.isel_trace = std::move(res.trace);
    cf.dot = std::move(res.dot);
    RegAllocOptions ra;
    ra.shuffle_seed = opts.shuffle_seed;
    cf.ra = allocate_registers(cf.mf, td, ra);
    insert_prologue_epilogue(cf.mf, td, cf.ra);
    lower_copies(cf.mf, td);
    fns.push_back(cf.mf);
    cm.functions.push_back(std::move(cf));
  }
  cm.object = emit_object(fns, td);
  cm.program = link(cm.object, data_symbols(cm.ir));
  return cm;
}

CompiledModule compile_text(std::string_view ir_text, std::string_view source_name, const TargetDesc& td,
                            const CompileOptions& opts) {
  return compile(parse_ir(ir_text, source_name), td, opts);
}

std::string asm_text(const CompiledModule& cm, const TargetDesc& td) {
  std::string out = "\t.text\n";
  for (const auto& f : cm.functions) {
    std::string body = print_function_asm(f.mf, td);
    size_t nl = body.find('\n');
    out += body.substr(0, nl + 1) + "# %bb.0:\n" + body.substr(nl + 1) + "\n";
  }
  out += print_data_asm(cm.ir);
  return out;
}

std::string obj_text(const CompiledModule& cm) {
  std::string out;
  for (uint32_t w : cm.object.words) out += fmt::format("0x{:08x}\n", w);
  out += "# symbols\n";
  for (const auto& [name, off] : cm.object.functions) out += fmt::format("# 0x{:08x} {}\n", off, name);
  out += "# relocations\n";
  for (const auto& r : cm.object.relocations)
    out += fmt::format("# 0x{:08x} {} {}\n", r.offset, reloc_kind_name(r.kind), r.symbol);
  return out;
}

std::map<std::string, int> opcode_histogram(const MachineFunction& mf, const TargetDesc& td) {
  std::map<std::string, int> h;
  for (const auto& mi : mf.instrs) {
    std::string text = format_asm(td, mi);
    ++h[text.substr(0, text.find_first_of(" \t"))];
  }
  return h;
}

FunctionInputs random_inputs(const IrModule& m, const IrFunction& f, std::mt19937& rng) {
  FunctionInputs in;
  in.memory = initial_memory(m);
  for (size_t i = 0; i < f.params.size(); ++i) {
    if (f.params[i].type == IrType::Ptr) {
      uint32_t base = arg_buffer_address(static_cast<int>(i));
      for (uint32_t off = 0; off < 0x100; off += 4) in.memory.write32(base + off, rng());
      in.args.push_back(base);
    } else {
      in.args.push_back(rng());
    }
  }
  return in;
}

RunResult run_compiled(const CompiledModule& cm, const TargetDesc& td, std::string_view function,
                       const std::vector<uint32_t>& args, Memory mem, uint64_t fuel, bool keep_trace) {
  auto it = cm.object.functions.find(std::string(function));
  if (it == cm.object.functions.end()) throw Error(fmt::format("no function named '{}'", function));
  return run_function(td, cm.program, kTextBase + it->second, args, std::move(mem), fuel, keep_trace);
}

}  // namespace rvx
