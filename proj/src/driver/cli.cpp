#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rvx/driver.h"

namespace rvx {

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("{}: cannot open file", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::string& out) {
  if (path.empty() || path == "-") {
    out += text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("{}: cannot write file", path));
  f << text;
}

std::string source_name(const std::string& path) { return path.empty() || path == "-" ? "<stdin>" : path; }

int64_t parse_number(std::string_view s) {
  std::string t(s);
  try {
    size_t used = 0;
    int64_t v = std::stoll(t, &used, 0);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw UsageError(fmt::format("'{}' is not a number", s));
  }
}

std::vector<std::string> split_csv(std::string_view csv) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= csv.size()) {
    size_t comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    if (comma > start) out.emplace_back(csv.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

struct TargetOptions {
  std::string mattr;
  std::string desc_path;
  std::optional<TargetDesc> owned;

  void add(CLI::App* cmd) {
    const char* env = std::getenv("RVX_MATTR");
    mattr = env ? env : "";
    cmd->add_option("--mattr", mattr, "Extensions on top of I+M, e.g. +zba,+xcrypt (default: $RVX_MATTR)");
    cmd->add_option("--target-desc", desc_path, "Target description file (default: the built-in one)");
  }
  ExtensionSet exts() const { return ExtensionSet::parse_mattr(mattr); }
  const TargetDesc& td() {
    if (desc_path.empty()) return builtin_target();
    if (!owned) {
      std::string text = read_file(desc_path);
      owned = load_target_desc(text, desc_path);
    }
    return *owned;
  }
};

struct Cli {
  CLI::App app{"Toy RV32 compiler toolchain with custom-instruction support", "rvx"};
  std::string& out;
  std::string& err;
  std::function<std::string()> read_stdin;

  std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") return read_stdin();
    return read_file(path);
  }

  // opt / llc / run
  std::string input = "-";
  std::string output = "-";
  int opt_level = 2;
  std::string passes;
  bool stats = false;
  TargetOptions target;
  std::string emit = "asm";
  std::string dag_stage = "selected";
  bool debug_isel = false;
  int zba_threshold = 2;
  bool shuffle_regs = false;
  // mc
  bool show_encoding = false;
  std::string filetype = "asm";
  bool disassemble = false;
  bool no_aliases = false;
  // run
  std::string function;
  std::string args;
  std::vector<std::string> mem_init;
  bool trace = false;
  bool interp = false;
  uint64_t fuel = kDefaultFuel;
  // lit / update-checks / filecheck
  std::vector<std::string> paths;
  bool verbose = false;
  int workers = 1;
  std::string check_file;
  std::vector<std::string> prefixes;
  std::string input_file;

  CLI::App* opt = nullptr;
  CLI::App* llc = nullptr;
  CLI::App* mc = nullptr;
  CLI::App* run = nullptr;
  CLI::App* lit = nullptr;
  CLI::App* fc = nullptr;
  CLI::App* upd = nullptr;

  Cli(std::string& o, std::string& e, std::function<std::string()> i) : out(o), err(e), read_stdin(std::move(i)) {
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    opt = app.add_subcommand("opt", "Run the midend pipeline on an IR module and print the result");
    opt->add_option("input", input, "IR file, or - for stdin");
    opt->add_option("-o", output, "Output file");
    opt->add_option("-O", opt_level, "Optimization level")->check(CLI::IsMember({0, 2}));
    opt->add_option("--passes", passes, "Comma-separated pass list instead of -O2");
    opt->add_flag("--stats", stats, "Print pass statistics to stderr");

    llc = app.add_subcommand("llc", "Compile an IR module to RV32 assembly, object words or a DAG graph");
    llc->add_option("input", input, "IR file, or - for stdin");
    llc->add_option("-o", output, "Output file");
    llc->add_option("-O", opt_level, "Optimization level")->check(CLI::IsMember({0, 2}));
    target.add(llc);
    llc->add_option("--emit", emit, "asm, obj or dot")->check(CLI::IsMember({"asm", "obj", "dot"}));
    llc->add_option("--dag-stage", dag_stage, "DAG snapshot for --emit=dot")
        ->check(CLI::IsMember({"built", "combined1", "legalized", "combined2", "selected"}));
    llc->add_flag("--debug-isel", debug_isel, "Print the instruction selection trace to stderr");
    llc->add_option("--zba-threshold", zba_threshold, "Use Zba constant synthesis above this many instructions");
    llc->add_flag("--stats", stats, "Print pass statistics to stderr");
    llc->add_flag("--shuffle-regs", shuffle_regs)->group("");

    mc = app.add_subcommand("mc", "Assemble or disassemble RV32 instructions");
    mc->add_option("input", input, "Assembly (or hex words with --disassemble), or - for stdin");
    mc->add_option("-o", output, "Output file");
    target.add(mc);
    mc->add_flag("--show-encoding", show_encoding, "Append each instruction's encoding bytes");
    mc->add_option("--filetype", filetype, "asm or obj")->check(CLI::IsMember({"asm", "obj"}));
    mc->add_flag("--disassemble", disassemble, "Decode hex words, one per line");
    mc->add_flag("--no-aliases", no_aliases, "Print canonical instructions instead of aliases");

    run = app.add_subcommand("run", "Compile a function and execute it on the simulator");
    run->add_option("input", input, "IR file, or - for stdin");
    run->add_option("--fn", function, "Function to run (default: the first)");
    run->add_option("--args", args, "Comma-separated i32 arguments; pointer arguments get a buffer");
    run->add_option("--mem", mem_init, "ADDR=VALUE word written before the run (repeatable)");
    run->add_option("-O", opt_level, "Optimization level")->check(CLI::IsMember({0, 2}));
    target.add(run);
    run->add_option("--zba-threshold", zba_threshold, "Use Zba constant synthesis above this many instructions");
    run->add_flag("--trace", trace, "Print every executed instruction");
    run->add_flag("--interp", interp, "Evaluate the IR directly instead of compiling");
    run->add_option("--fuel", fuel, "Maximum number of executed instructions");

    lit = app.add_subcommand("lit", "Run RUN-line tests");
    lit->add_option("paths", paths, "Test files or directories")->required();
    lit->add_flag("-v", verbose, "Show output of failing tests");
    lit->add_option("--workers", workers, "Tests run concurrently")->check(CLI::PositiveNumber);

    fc = app.add_subcommand("filecheck", "Check stdin against directives in a file");
    fc->add_option("checkfile", check_file, "File holding the check directives")->required();
    fc->add_option("--check-prefixes,--check-prefix", prefixes, "Enabled prefixes (default CHECK)")
        ->delimiter(',');
    fc->add_option("--input-file", input_file, "Read the candidate text from a file instead of stdin");

    upd = app.add_subcommand("update-checks", "Regenerate CHECK lines of LLC tests from current output");
    upd->add_option("paths", paths, "Test files")->required();
  }

  CompileOptions compile_options() {
    CompileOptions co;
    co.exts = target.exts();
    co.opt_level = opt_level;
    co.zba_threshold = zba_threshold;
    co.debug_isel = debug_isel;
    if (emit == "dot") co.dot_stage = parse_dag_stage(dag_stage);
    if (shuffle_regs) co.shuffle_seed = std::random_device{}();
    return co;
  }

  int do_opt() {
    IrModule m = parse_ir(read_input(input), source_name(input));
    PassStats st;
    if (!passes.empty()) m = run_pipeline(std::move(m), parse_pass_list(passes), &st);
    else m = optimize(std::move(m), opt_level, &st);
    write_output(output, print_ir(m), out);
    if (stats) err += st.format();
    return 0;
  }

  int do_llc() {
    const TargetDesc& td = target.td();
    CompiledModule cm = compile_text(read_input(input), source_name(input), td, compile_options());
    if (debug_isel)
      for (const auto& f : cm.functions) {
        err += fmt::format("=== {}\n", f.mf.name);
        for (const auto& l : f.isel_trace) err += l + "\n";
      }
    if (stats) err += cm.stats.format();
    std::string text;
    if (emit == "asm") text = asm_text(cm, td);
    else if (emit == "obj") text = obj_text(cm);
    else
      for (const auto& f : cm.functions) text += f.dot;
    write_output(output, text, out);
    return 0;
  }

  int do_mc() {
    const TargetDesc& td = target.td();
    ExtensionSet exts = target.exts();
    std::string text = read_input(input);
    std::string result;
    if (disassemble) {
      std::istringstream lines(text);
      std::string line;
      uint32_t offset = 0;
      int lineno = 0;
      while (std::getline(lines, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line.erase(0, line.find_first_not_of(" \t"));
        line.erase(line.find_last_not_of(" \t\r") + 1);
        if (line.empty()) continue;
        uint32_t w = static_cast<uint32_t>(parse_number(line));
        auto mi = td.decode(w, exts);
        if (!mi) throw Error(fmt::format("{}:{}: invalid instruction encoding 0x{:08x}", source_name(input), lineno, w));
        result += fmt::format("{:8x}: {:02x} {:02x} {:02x} {:02x} \t{}\n", offset, w & 0xFF, (w >> 8) & 0xFF,
                              (w >> 16) & 0xFF, w >> 24, format_asm(td, *mi, false));
        offset += 4;
      }
    } else {
      auto lines = assemble(td, text, exts, source_name(input));
      if (filetype == "asm") result = "\t.text\n";
      for (const auto& l : lines) {
        uint32_t w = td.encode(l.mi);
        if (filetype == "obj") {
          result += fmt::format("0x{:08x}\n", w);
          continue;
        }
        result += "\t" + format_asm(td, l.mi, !no_aliases);
        if (show_encoding)
          result += fmt::format("\t# encoding: [0x{:02x},0x{:02x},0x{:02x},0x{:02x}]", w & 0xFF, (w >> 8) & 0xFF,
                                (w >> 16) & 0xFF, w >> 24);
        result += "\n";
      }
    }
    write_output(output, result, out);
    return 0;
  }

  int do_run() {
    const TargetDesc& td = target.td();
    IrModule m = parse_ir(read_input(input), source_name(input));
    if (m.functions.empty()) throw Error(fmt::format("{}: no functions", source_name(input)));
    const IrFunction* f = function.empty() ? &m.functions.front() : m.find_function(function);
    if (!f) throw Error(fmt::format("no function named '{}'", function));
    std::vector<std::string> given = split_csv(args);
    Memory mem = initial_memory(m);
    std::vector<uint32_t> argv;
    size_t next = 0;
    for (size_t i = 0; i < f->params.size(); ++i) {
      if (f->params[i].type == IrType::Ptr) {
        argv.push_back(arg_buffer_address(static_cast<int>(i)));
      } else {
        if (next >= given.size()) throw UsageError(fmt::format("@{} needs more --args values", f->name));
        argv.push_back(static_cast<uint32_t>(parse_number(given[next++])));
      }
    }
    if (next != given.size()) throw UsageError(fmt::format("@{} takes fewer --args values", f->name));
    for (const auto& kv : mem_init) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError(fmt::format("--mem expects ADDR=VALUE, got '{}'", kv));
      mem.write32(static_cast<uint32_t>(parse_number(kv.substr(0, eq))),
                  static_cast<uint32_t>(parse_number(kv.substr(eq + 1))));
    }
    std::optional<uint32_t> ret;
    Memory after;
    if (interp) {
      IrModule opt = optimize(m, opt_level);
      auto r = ir_interpret(opt, *opt.find_function(f->name), argv, mem);
      ret = r.ret;
      after = std::move(r.memory);
    } else {
      CompiledModule cm = compile(m, td, compile_options());
      auto r = run_compiled(cm, td, f->name, argv, mem, fuel, trace);
      for (const auto& s : r.trace) out += fmt::format("{:08x}: {:<28} {}\n", s.pc, s.text, s.effect);
      if (f->return_type != IrType::Void) ret = r.ret;
      after = std::move(r.memory);
    }
    if (ret) out += fmt::format("ret = 0x{:08x} ({})\n", *ret, static_cast<int32_t>(*ret));
    std::map<uint32_t, uint32_t> words;
    for (const auto& [addr, byte] : after.observable()) words[addr & ~3u] = 0;
    for (auto& [addr, w] : words) w = after.read32(addr);
    for (const auto& [addr, w] : words) out += fmt::format("mem[0x{:08x}] = 0x{:08x}\n", addr, w);
    return 0;
  }

  int do_lit() {
    LitOptions lo;
    lo.workers = workers;
    lo.verbose = verbose;
    auto rep = run_lit(paths, cli_runner(), lo);
    out += rep.text;
    return rep.failed == 0 ? 0 : 1;
  }

  int do_filecheck() {
    std::string checks = read_file(check_file);
    std::string candidate = input_file.empty() ? read_stdin() : read_file(input_file);
    if (prefixes.empty()) prefixes = {"CHECK"};
    auto r = filecheck(candidate, checks, prefixes, check_file);
    if (r.ok) return 0;
    err += r.detail;
    return 1;
  }

  int do_update() {
    int status = 0;
    for (const auto& p : paths) {
      auto r = update_checks(p, cli_runner());
      if (!r.ok) {
        err += r.error;
        status = 1;
        continue;
      }
      if (r.changed) write_output(p, r.content, out);
      out += fmt::format("{}: {}\n", p, r.changed ? "updated" : "up to date");
    }
    return status;
  }

  int dispatch() {
    if (opt->parsed()) return do_opt();
    if (llc->parsed()) return do_llc();
    if (mc->parsed()) return do_mc();
    if (run->parsed()) return do_run();
    if (lit->parsed()) return do_lit();
    if (fc->parsed()) return do_filecheck();
    return do_update();
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, const std::string& in, std::string& out, std::string& err) {
  return run_cli(args, [&in] { return in; }, out, err);
}

int run_cli(const std::vector<std::string>& args, const std::function<std::string()>& read_stdin, std::string& out,
            std::string& err) {
  Cli cli(out, err, read_stdin);
  std::vector<const char*> argv{"rvx"};
  for (const auto& a : args) argv.push_back(a.c_str());
  if (args.empty()) {
    err += cli.app.help();
    return 2;
  }
  try {
    cli.app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    std::ostringstream o, e2;
    cli.app.exit(e, o, e2);
    out += o.str();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::ostringstream o, e2;
    cli.app.exit(e, o, e2);
    out += o.str();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    cli.app.exit(e, o, e2);
    err += e2.str();
    return 2;
  }
  std::string sub = args.front();
  try {
    return cli.dispatch();
  } catch (const UsageError& e) {
    err += fmt::format("rvx {}: error: {}\n", sub, e.what());
    return 2;
  } catch (const std::exception& e) {
    err += fmt::format("rvx {}: error: {}\n", sub, e.what());
    return 1;
  }
}

CommandRunner cli_runner() {
  return [](const std::vector<std::string>& argv, const std::string& in, std::string& out, std::string& err) {
    return run_cli(argv, in, out, err);
  };
}

}  // namespace rvx
