#include <doctest.h>

#include <set>

#include "../support.h"

using namespace rvx;
using namespace rvx::testing;

namespace {

const TargetDesc& td() { return builtin_target(); }

int count_kind(const SelDag& dag, DagKind k) {
  int n = 0;
  for (const auto& node : dag.nodes) n += !node.dead && node.kind == k;
  return n;
}

int count_machine(const SelDag& dag, std::string_view record) {
  int n = 0;
  int def = td().find(record);
  for (const auto& node : dag.nodes) n += !node.dead && node.kind == DagKind::Machine && node.def == def;
  return n;
}

struct Staged {
  IrModule m;
  SelDag dag;
  std::vector<std::string> trace;
};

// Runs the DAG stages up to and including `last` on one function.
Staged stage(IrModule m, std::string_view fn, DagStage last, ExtensionSet exts) {
  Staged s{std::move(m), {}, {}};
  const IrFunction* f = s.m.find_function(fn);
  REQUIRE(f);
  s.dag = build_dag(*f, s.m);
  if (last == DagStage::Built) return s;
  combine(s.dag, CombineStage::PreLegalize);
  if (last == DagStage::Combined1) return s;
  legalize(s.dag, exts);
  if (last == DagStage::Legalized) return s;
  combine(s.dag, CombineStage::PostLegalize);
  if (last == DagStage::Combined2) return s;
  IselOptions opts;
  opts.exts = exts;
  opts.trace = true;
  select(s.dag, td(), opts, default_hooks(), &s.trace);
  return s;
}

Staged stage_corpus(std::string_view file, std::string_view fn, DagStage last, std::string_view mattr,
                    int opt_level = 2) {
  return stage(optimize(load_corpus(file), opt_level), fn, last, ExtensionSet::parse_mattr(mattr));
}

bool trace_has(const std::vector<std::string>& trace, std::string_view needle) {
  for (const auto& l : trace)
    if (l.find(needle) != std::string::npos) return true;
  return false;
}

// ---- pattern/semantics agreement --------------------------------------------

struct Bindings {
  std::map<std::string, uint32_t> value;  // capture -> register value or immediate
  std::map<std::string, int> reg;         // register captures -> physical register
};

void collect_captures(const PatNode& n, bool under_load, std::vector<std::pair<const PatNode*, bool>>& out) {
  if (n.kind == PatNode::Kind::Reg || n.kind == PatNode::Kind::Imm) {
    out.push_back({&n, under_load});
    return;
  }
  for (const auto& k : n.kids) collect_captures(k, n.op == "load", out);
}

uint32_t eval_source(const PatNode& n, const Bindings& b, const Memory& mem) {
  switch (n.kind) {
    case PatNode::Kind::Reg:
    case PatNode::Kind::Imm: return b.value.at(n.capture);
    case PatNode::Kind::Const: return static_cast<uint32_t>(n.value);
    case PatNode::Kind::Op: break;
  }
  uint32_t x = eval_source(n.kids[0], b, mem);
  if (n.op == "load") return mem.read32(x);
  if (n.op == "not") return ~x;
  uint32_t y = eval_source(n.kids[1], b, mem);
  if (n.op == "add") return x + y;
  if (n.op == "sub") return x - y;
  if (n.op == "mul") return x * y;
  if (n.op == "and") return x & y;
  if (n.op == "or") return x | y;
  if (n.op == "xor") return x ^ y;
  if (n.op == "shl") return x << (y & 31u);
  if (n.op == "srl") return x >> (y & 31u);
  if (n.op == "sra") return static_cast<uint32_t>(static_cast<int32_t>(x) >> (y & 31u));
  if (n.op == "rotr") return y % 32 == 0 ? x : (x >> (y % 32)) | (x << (32 - y % 32));
  FAIL("unhandled pattern op " << n.op);
  return 0;
}

struct Emitter {
  const Bindings& b;
  std::vector<MachineInstr> out;
  int next_temp = 0;

  int temp() {
    static const int temps[] = {5, 6, 7, 28, 29, 30, 31};
    return temps[next_temp++ % 7];
  }

  MachineOperand operand(const OutNode& n) {
    if (n.def < 0) {
      if (n.as_imm) return MachineOperand::imm(static_cast<int32_t>(b.value.at(n.capture)));
      return MachineOperand::preg(b.reg.at(n.capture));
    }
    return MachineOperand::preg(emit(n, temp()));
  }

  int emit(const OutNode& n, int rd) {
    const InstrDef& def = td().def(n.def);
    std::vector<MachineOperand> kids;
    for (const auto& k : n.kids) kids.push_back(operand(k));
    MachineInstr mi;
    mi.def = n.def;
    for (Role role : def.operands) {
      if (role == Role::Rd) {
        mi.ops.push_back(MachineOperand::preg(rd));
        continue;
      }
      auto it = std::find(def.inputs.begin(), def.inputs.end(), role);
      REQUIRE(it != def.inputs.end());
      mi.ops.push_back(kids.at(static_cast<size_t>(it - def.inputs.begin())));
    }
    out.push_back(std::move(mi));
    return rd;
  }
};

uint32_t random_imm(std::string_view leaf_type, std::mt19937& rng) {
  if (leaf_type == "simm12") return static_cast<uint32_t>(static_cast<int32_t>(rng() % 4096) - 2048);
  return rng() % 32;
}

}  // namespace

TEST_CASE("build_dag threads memory operations on one chain") {
  auto s = stage(load_corpus("madd.ll"), "maddFunc", DagStage::Built, ExtensionSet::base_im());
  CHECK(count_kind(s.dag, DagKind::Mul) == 1);
  CHECK(count_kind(s.dag, DagKind::Add) == 1);
  CHECK(count_kind(s.dag, DagKind::Store) == 4);
  CHECK(count_kind(s.dag, DagKind::Load) == 3);
  bool add_stored = false;
  for (const auto& n : s.dag.nodes)
    if (!n.dead && n.kind == DagKind::Store && s.dag.at(n.ops[0].node).kind == DagKind::Add) add_stored = true;
  CHECK(add_stored);
  // Walk the chain back from ret to the entry token: every memory op is on it.
  int on_chain = 0;
  std::optional<DagValue> c = s.dag.at(s.dag.root).chain;
  while (c && c->node != s.dag.entry) {
    auto k = s.dag.at(c->node).kind;
    on_chain += k == DagKind::Load || k == DagKind::Store;
    c = s.dag.at(c->node).chain;
  }
  CHECK(on_chain == 7);
}

TEST_CASE("ret-only function builds EntryToken and ret") {
  auto s = stage(parse_ir("define void @f() {\n  ret void\n}\n"), "f", DagStage::Built, ExtensionSet::base_im());
  CHECK(s.dag.live_count() == 2);
  CHECK(s.dag.at(s.dag.root).kind == DagKind::Ret);
  std::string dot = emit_dot(s.dag, "built");
  size_t nodes = 0;
  for (size_t p = dot.find("[label="); p != std::string::npos; p = dot.find("[label=", p + 1)) ++nodes;
  CHECK(nodes == 2);
  CHECK(dot.rfind("digraph", 0) == 0);
}

TEST_CASE("loads of one global share its GlobalAddress node") {
  auto m = parse_ir(
      "@g = global i32 5, align 4\n"
      "define i32 @f() {\n  %0 = load i32, ptr @g, align 4\n  %1 = load i32, ptr @g, align 4\n"
      "  %s = add i32 %0, %1\n  ret i32 %s\n}\n");
  std::set<int32_t> globals;
  for (const auto& i : m.functions[0].body().insts)
    for (const auto& v : i.operands)
      if (v.kind == IrValue::Kind::Global) globals.insert(v.payload);
  auto s = stage(std::move(m), "f", DagStage::Built, ExtensionSet::base_im());
  CHECK(count_kind(s.dag, DagKind::Load) == 2);
  CHECK(count_kind(s.dag, DagKind::GlobalAddress) == static_cast<int>(globals.size()));
}

TEST_CASE("combine removes orphans and merges constants") {
  auto s = stage(parse_ir("define i32 @f(i32 %a) {\n  %x = add i32 %a, 4\n  ret i32 %x\n}\n"), "f", DagStage::Built,
                 ExtensionSet::base_im());
  DagNode zero;
  zero.kind = DagKind::Constant;
  zero.has_value = true;
  zero.imm = 0;
  int orphan = s.dag.add(zero);
  DagNode four = zero;
  four.imm = 4;
  int second = s.dag.add(four);
  DagValue ret_val = s.dag.at(s.dag.root).ops[0];
  DagNode add2;
  add2.kind = DagKind::Add;
  add2.has_value = true;
  add2.ops = {ret_val, {second, 0}};
  int a2 = s.dag.add(add2);
  s.dag.at(s.dag.root).ops[0] = {a2, 0};
  combine(s.dag, CombineStage::PreLegalize);
  CHECK(s.dag.at(orphan).dead);
  int fours = 0;
  for (const auto& n : s.dag.nodes) fours += !n.dead && n.kind == DagKind::Constant && n.imm == 4;
  CHECK(fours == 1);
  size_t before = s.dag.live_count();
  combine(s.dag, CombineStage::PostLegalize);
  CHECK(s.dag.live_count() == before);
}

TEST_CASE("legalize splits global addresses") {
  auto s = stage_corpus("madd.ll", "maddFunc", DagStage::Legalized, "", 0);
  CHECK(count_kind(s.dag, DagKind::GlobalAddress) == 0);
  CHECK(count_kind(s.dag, DagKind::Hi) == 3);
  CHECK(count_kind(s.dag, DagKind::AddLo) == 3);
  for (const auto& n : s.dag.nodes)
    if (!n.dead && (n.kind == DagKind::Load || n.kind == DagKind::Store))
      CHECK(s.dag.at(n.ops.back().node).kind == DagKind::AddLo);
}

TEST_CASE("rotr stays legal with Zbb and expands without") {
  for (auto fn : {"rotr2", "rotr2_fshr"}) {
    CAPTURE(fn);
    auto zbb = stage_corpus("rotimm.ll", fn, DagStage::Legalized, "+zbb");
    CHECK(count_kind(zbb.dag, DagKind::Rotr) == 1);
    CHECK(count_kind(zbb.dag, DagKind::Fshr) == 0);
    auto base = stage_corpus("rotimm.ll", fn, DagStage::Legalized, "");
    CHECK(count_kind(base.dag, DagKind::Rotr) == 0);
    CHECK(count_kind(base.dag, DagKind::Or) == 1);
    CHECK(count_kind(base.dag, DagKind::Shl) == 1);
    CHECK(count_kind(base.dag, DagKind::Srl) == 1);
  }
  auto base = compile_corpus("rotimm.ll", "");
  std::mt19937 rng(41);
  for (int n = 0; n < 1000; ++n) {
    uint32_t x = rng();
    REQUIRE(run_compiled(base, td(), "rotr2_fshr", {x}, Memory{}).ret == rotr32(x, 2));
  }
}

TEST_CASE("variable rotate under Xcrypt alone is expanded") {
  auto s = stage_corpus("diffusion.ll", "rotl_var", DagStage::Selected, "+xcrypt");
  CHECK(count_machine(s.dag, "ROTI") == 0);
  auto z = stage_corpus("diffusion.ll", "rotl_var", DagStage::Selected, "+zbb");
  CHECK(count_machine(z.dag, "ROR") == 1);
}

TEST_CASE("select picks MLA, SH1ADD pairs and NAXOR") {
  auto madd = stage_corpus("arith.ll", "madd", DagStage::Selected, "+xcrypt");
  CHECK(count_machine(madd.dag, "MLA") == 1);
  CHECK(count_machine(madd.dag, "MUL") == 0);
  auto sh = stage_corpus("sh1add.ll", "mul6add", DagStage::Selected, "+zba");
  CHECK(count_machine(sh.dag, "SH1ADD") == 2);
  CHECK(count_machine(sh.dag, "MUL") == 0);
  auto reuse = stage_corpus("sh1add.ll", "mul6add_reuse", DagStage::Selected, "+zba");
  CHECK(count_machine(reuse.dag, "MUL") == 1);
  auto sbox = stage_corpus("sbox.ll", "sbox", DagStage::Selected, "+xcrypt");
  CHECK(count_machine(sbox.dag, "NAXOR") == 5);
  CHECK(trace_has(madd.trace, "pattern matched:"));
}

TEST_CASE("hook wins over the declarative LXR pattern") {
  auto s = stage_corpus("lxr.ll", "dep16", DagStage::Selected, "+xcrypt");
  CHECK(trace_has(s.trace, "[1] both operands are loads: yes"));
  CHECK(trace_has(s.trace, "[5] offset is 16: yes"));
  CHECK(trace_has(s.trace, "emitted ADDI + LXR"));
  CHECK_FALSE(trace_has(s.trace, "-> LXR"));
  auto mf = schedule(s.dag, td(), "dep16");
  auto lines = body_lines(mf);
  auto lxr = std::find_if(lines.begin(), lines.end(), [](const std::string& l) { return l.rfind("lxr", 0) == 0; });
  REQUIRE(lxr != lines.end());
  REQUIRE(lxr != lines.begin());
  CHECK(std::prev(lxr)->rfind("addi", 0) == 0);
  auto d8 = stage_corpus("lxr.ll", "dep8", DagStage::Selected, "+xcrypt");
  CHECK(trace_has(d8.trace, "[5] offset is 16: no"));
  CHECK(trace_has(d8.trace, "-> LXR"));
  auto indep = stage_corpus("lxr.ll", "foo", DagStage::Selected, "+xcrypt");
  CHECK(trace_has(indep.trace, "[2] second address is an add: no"));
  CHECK(count_machine(indep.dag, "LXR") == 1);
}

TEST_CASE("schedule keeps loads before mla before the store") {
  auto s = stage_corpus("madd.ll", "maddFunc", DagStage::Selected, "+xcrypt", 0);
  auto mf = schedule(s.dag, td(), "maddFunc");
  int mla = -1, last_load = -1, first_store_after = -1;
  for (size_t i = 0; i < mf.instrs.size(); ++i) {
    const auto& d = td().def(mf.instrs[i].def);
    if (d.record == "MLA") mla = static_cast<int>(i);
    if (d.record == "LW") last_load = static_cast<int>(i);
    if (d.record == "SW" && mla >= 0 && first_store_after < 0) first_store_after = static_cast<int>(i);
  }
  REQUIRE(mla >= 0);
  CHECK(last_load < mla);
  CHECK(first_store_after > mla);
  auto ret = stage(parse_ir("define void @f() {\n  ret void\n}\n"), "f", DagStage::Selected, ExtensionSet::base_im());
  CHECK(schedule(ret.dag, td(), "f").instrs.size() == 1);
}

TEST_CASE("memory operation order survives scheduling") {
  for (const auto& file : corpus_files()) {
    auto m = optimize(load_corpus(file), 2);
    for (const auto& f : m.functions) {
      CAPTURE(file);
      CAPTURE(f.name);
      std::vector<Opcode> ir_order;
      for (const auto& i : f.body().insts)
        if (i.op == Opcode::Load || i.op == Opcode::Store) ir_order.push_back(i.op);
      auto s = stage(m, f.name, DagStage::Selected, ExtensionSet::base_im());
      std::vector<Opcode> mc_order;
      for (const auto& mi : schedule(s.dag, td(), f.name).instrs) {
        if (mi.is_copy) continue;
        const auto& d = td().def(mi.def);
        if (d.may_load) mc_order.push_back(Opcode::Load);
        if (d.may_store) mc_order.push_back(Opcode::Store);
      }
      CHECK(mc_order == ir_order);
    }
  }
}

TEST_CASE("dot output labels") {
  auto pre = stage_corpus("madd.ll", "maddFunc", DagStage::Combined2, "+xcrypt", 0);
  CHECK(emit_dot(pre.dag, "combined2").find(": mul:i32") != std::string::npos);
  auto sbox = stage_corpus("sbox.ll", "sbox", DagStage::Selected, "+xcrypt");
  std::string dot = emit_dot(sbox.dag, "selected", &td());
  size_t naxor = 0;
  for (size_t p = dot.find(": NAXOR:"); p != std::string::npos; p = dot.find(": NAXOR:", p + 1)) ++naxor;
  CHECK(naxor == 5);
  CHECK(dot.find("style=dashed") != std::string::npos);
}

TEST_CASE("selection leaves no generic node") {
  for (const auto& file : corpus_files()) {
    auto m = optimize(load_corpus(file), 2);
    for (const auto& mattr : extension_subsets()) {
      for (const auto& f : m.functions) {
        CAPTURE(file);
        CAPTURE(mattr);
        CAPTURE(f.name);
        auto s = stage(m, f.name, DagStage::Selected, ExtensionSet::parse_mattr(mattr));
        for (const auto& n : s.dag.nodes) CHECK_FALSE((!n.dead && is_generic(n.kind)));
      }
    }
  }
}

TEST_CASE("uncovered nodes are reported") {
  SelDag dag = build_dag(*parse_ir("define i32 @f(i32 %a) {\n  ret i32 %a\n}\n").find_function("f"),
                         parse_ir("define i32 @f(i32 %a) {\n  ret i32 %a\n}\n"));
  DagNode bad;
  bad.kind = DagKind::Fshl;
  bad.has_value = true;
  DagValue a = dag.at(dag.root).ops[0];
  bad.ops = {a, a, a};
  int id = dag.add(bad);
  dag.at(dag.root).ops[0] = {id, 0};
  IselOptions opts;
  CHECK_THROWS_WITH_AS(select(dag, td(), opts, default_hooks()), doctest::Contains("fshl"), Error);
}

TEST_CASE("compilation is deterministic") {
  for (const auto& file : corpus_files()) {
    CAPTURE(file);
    CompileOptions o = options("+zba,+zbb,+xcrypt");
    o.dot_stage = DagStage::Selected;
    auto a = compile(load_corpus(file), td(), o);
    auto b = compile(load_corpus(file), td(), o);
    CHECK(asm_text(a, td()) == asm_text(b, td()));
    CHECK(a.program == b.program);
    REQUIRE(a.functions.size() == b.functions.size());
    for (size_t i = 0; i < a.functions.size(); ++i) CHECK(a.functions[i].dot == b.functions[i].dot);
  }
}

TEST_CASE("enabling an extension never grows the corpus") {
  auto total = [](std::string_view mattr) {
    size_t n = 0;
    for (const auto& file : corpus_files())
      for (const auto& f : compile_corpus(file, mattr).functions) n += f.mf.instrs.size();
    return n;
  };
  size_t base = total("");
  size_t all = total("+zba,+zbb,+xcrypt");
  for (auto mattr : {"+zba", "+zbb", "+xcrypt"}) {
    CAPTURE(mattr);
    size_t one = total(mattr);
    CHECK(one <= base);
    CHECK(all <= one);
  }
}

TEST_CASE("every selection pattern agrees with the simulator") {
  std::mt19937 rng(42);
  for (const auto& pat : td().patterns) {
    CAPTURE(pat.text);
    std::vector<std::pair<const PatNode*, bool>> leaves;
    collect_captures(pat.source, false, leaves);
    for (int n = 0; n < 1000; ++n) {
      Bindings b;
      Memory mem;
      std::vector<uint32_t> args(8, 0);
      int next_reg = 11;
      for (auto [leaf, is_address] : leaves) {
        if (b.value.count(leaf->capture)) continue;
        if (leaf->kind == PatNode::Kind::Imm) {
          b.value[leaf->capture] = random_imm(leaf->leaf_type, rng);
          continue;
        }
        uint32_t v = rng();
        if (is_address) {
          v = arg_buffer_address(next_reg - 11) + 4 * (rng() % 16);
          mem.write32(v, rng());
        }
        b.value[leaf->capture] = v;
        b.reg[leaf->capture] = next_reg;
        args[static_cast<size_t>(next_reg - 10)] = v;
        ++next_reg;
      }
      uint32_t want = eval_source(pat.source, b, mem);
      Emitter e{b, {}, 0};
      e.emit(pat.target, kA0);
      std::vector<uint32_t> words;
      for (const auto& mi : e.out) words.push_back(td().encode(mi));
      MachineInstr ret;
      ret.def = td().find("JALR");
      ret.ops = {MachineOperand::preg(0), MachineOperand::imm(0), MachineOperand::preg(kRa)};
      words.push_back(td().encode(ret));
      uint32_t got = run_function(td(), words, kTextBase, args, mem).ret;
      REQUIRE(got == want);
    }
  }
}
