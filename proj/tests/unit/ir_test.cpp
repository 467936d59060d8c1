#include <doctest.h>

#include "../support.h"

using namespace rvx;
using namespace rvx::testing;

namespace {

int count_op(const IrFunction& f, Opcode op) {
  int n = 0;
  for (const auto& i : f.body().insts) n += i.op == op;
  return n;
}

}  // namespace

TEST_CASE("identity function parses") {
  auto m = parse_ir("define i32 @f(i32 %a){ ret i32 %a }");
  REQUIRE(m.functions.size() == 1);
  const auto& f = m.functions[0];
  REQUIRE(f.body().insts.size() == 1);
  CHECK(f.body().insts[0].op == Opcode::Ret);
  CHECK(f.body().insts[0].operands[0] == IrValue::arg(0, IrType::I32));
}

TEST_CASE("optimized S-box listing parses") {
  auto m = load_corpus("sbox.ll");
  REQUIRE(m.functions.size() == 1);
  const auto& f = m.functions[0];
  CHECK(count_op(f, Opcode::Load) == 5);
  CHECK(count_op(f, Opcode::Store) == 5);
  CHECK(count_op(f, Opcode::Xor) > 0);
  CHECK(count_op(f, Opcode::And) == 5);
}

TEST_CASE("i64 is rejected") {
  CHECK_THROWS_WITH_AS(parse_ir("define i64 @t(i64 %a) {\n  ret i64 %a\n}\n"), doctest::Contains("i64 unsupported"),
                       Error);
}

TEST_CASE("diagnostics carry line and column") {
  try {
    parse_ir("define i32 @f(i32 %a) {\n  %x = frob i32 %a, 1\n  ret i32 %x\n}\n", "t.ll");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t.ll:2:") == 0);
    CHECK(std::string(e.what()).find("unknown opcode") != std::string::npos);
  }
}

TEST_CASE("use of an undefined value is an error") {
  CHECK_THROWS_AS(parse_ir("define i32 @f() {\n  ret i32 %nope\n}\n"), Error);
}

TEST_CASE("not is spelled as xor with -1") {
  auto m = parse_ir("define i32 @f(i32 %a) {\n  %n = not i32 %a\n  ret i32 %n\n}\n");
  const auto& i = m.functions[0].body().insts[0];
  CHECK(i.op == Opcode::Xor);
  CHECK(i.operands[1].is_const(-1));
  CHECK(print_ir(m).find("xor i32 %a, -1") != std::string::npos);
}

TEST_CASE("print/parse round trip over the corpus") {
  for (const auto& file : corpus_files()) {
    CAPTURE(file);
    auto m = load_corpus(file);
    auto again = parse_ir(print_ir(m), file);
    CHECK(structurally_equal(m, again));
    CHECK(print_ir(again) == print_ir(m));
  }
}

TEST_CASE("globals print before functions and attributes on the define line") {
  auto m = load_corpus("madd.ll");
  auto text = print_ir(m);
  CHECK(text.find("@a =") < text.find("define"));
  auto s = print_ir(load_corpus("sbox.ll"));
  auto line_end = s.find('\n', s.find("define"));
  CHECK(s.substr(s.find("define"), line_end - s.find("define")).find("local_unnamed_addr") != std::string::npos);
}

TEST_CASE("verifier accepts every parsed corpus module") {
  for (const auto& file : corpus_files()) {
    CAPTURE(file);
    CHECK(verify(load_corpus(file)).empty());
  }
}

TEST_CASE("verifier reports use before def") {
  auto m = parse_ir("define i32 @f(i32 %a) {\n  %x = add i32 %a, 1\n  %y = add i32 %x, 1\n  ret i32 %y\n}\n");
  auto& insts = m.functions[0].body().insts;
  std::swap(insts[0], insts[1]);
  auto v = verify(m);
  REQUIRE(!v.empty());
  CHECK(v[0].rule == "use before def: %x");
  CHECK(v[0].function == "f");
  CHECK(v[0].inst_index == 0);
}

TEST_CASE("verifier reports a store through an i32 address") {
  auto m = parse_ir("define void @f(ptr %p, i32 %a) {\n  store i32 %a, ptr %p\n  ret void\n}\n");
  m.functions[0].body().insts[0].operands[1] = IrValue::arg(1, IrType::I32);
  auto v = verify(m);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule.find("store address") != std::string::npos);
}

TEST_CASE("gep offsets fold struct and array indices") {
  auto m = load_corpus("sbox_unopt.ll");
  const auto& f = m.functions[0];
  std::vector<int32_t> offsets;
  for (const auto& i : f.body().insts)
    if (i.op == Opcode::Gep) offsets.push_back(i.operands[1].payload);
  CHECK(std::find(offsets.begin(), offsets.end(), 16) != offsets.end());
  CHECK(std::find(offsets.begin(), offsets.end(), 12) != offsets.end());
}

TEST_CASE("funnel-shift intrinsics become opcodes") {
  auto m = load_corpus("rotimm.ll");
  const auto* f = m.find_function("rotr2_fshr");
  REQUIRE(f);
  CHECK(f->body().insts[0].op == Opcode::Fshr);
}
