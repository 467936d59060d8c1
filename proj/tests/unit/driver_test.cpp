#include <doctest.h>

#include <cstdlib>

#include "../support.h"

using namespace rvx;
using namespace rvx::testing;

namespace {

struct Outcome {
  int status = 0;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args, const std::string& in = "") {
  Outcome o;
  o.status = run_cli(args, in, o.out, o.err);
  return o;
}

int count(std::string_view text, std::string_view needle) {
  int n = 0;
  for (size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("no arguments prints usage") {
  auto o = cli({});
  CHECK(o.status == 2);
  CHECK(o.err.find("Usage") != std::string::npos);
  CHECK(o.err.find("llc") != std::string::npos);
}

TEST_CASE("unknown flags are usage errors") {
  auto o = cli({"llc", "--frobnicate", source_path("corpus/sbox.ll")});
  CHECK(o.status == 2);
  CHECK_FALSE(o.err.empty());
  CHECK(cli({"llc", "--mattr=+avx", source_path("corpus/sbox.ll")}).status != 0);
}

TEST_CASE("input errors return 1 with a diagnostic") {
  auto o = cli({"llc", "-"}, "define i64 @t(i64 %a) {\n  ret i64 %a\n}\n");
  CHECK(o.status == 1);
  CHECK(o.err.find("i64 unsupported") != std::string::npos);
}

TEST_CASE("llc selects five naxor on the S-box") {
  auto o = cli({"llc", "--mattr=+xcrypt", source_path("corpus/sbox.ll")});
  REQUIRE(o.status == 0);
  CHECK(count(o.out, "\tnaxor\t") + count(o.out, "\tnaxor ") == 5);
  auto base = cli({"llc", source_path("corpus/sbox.ll")});
  CHECK(count(base.out, "naxor") == 0);
}

TEST_CASE("opt --stats reports dead store elimination") {
  auto o = cli({"opt", "--stats", source_path("corpus/sbox_unopt.ll")});
  REQUIRE(o.status == 0);
  CHECK(o.err.find("7 dse - Number of stores deleted") != std::string::npos);
  CHECK(o.out.find("define") != std::string::npos);
  auto p = cli({"opt", "--passes=sroa,nope", source_path("corpus/sbox_unopt.ll")});
  CHECK(p.status != 0);
}

TEST_CASE("llc -O2 equals opt -O2 then llc -O0") {
  for (const auto& file : corpus_files()) {
    for (const auto& mattr : extension_subsets()) {
      CAPTURE(file);
      CAPTURE(mattr);
      std::vector<std::string> flags;
      if (!mattr.empty()) flags.push_back("--mattr=" + mattr);
      std::vector<std::string> a = {"llc", "-O", "2"}, b = {"llc", "-O", "0"};
      a.insert(a.end(), flags.begin(), flags.end());
      b.insert(b.end(), flags.begin(), flags.end());
      a.push_back(source_path("corpus/" + file));
      b.push_back("-");
      auto direct = cli(a);
      auto opt = cli({"opt", "-O", "2", source_path("corpus/" + file)});
      REQUIRE(opt.status == 0);
      auto staged = cli(b, opt.out);
      REQUIRE(direct.status == 0);
      REQUIRE(staged.status == 0);
      CHECK(direct.out == staged.out);
    }
  }
}

TEST_CASE("RVX_MATTR supplies the default extensions") {
  ::setenv("RVX_MATTR", "+xcrypt", 1);
  auto env = cli({"llc", source_path("corpus/shlxor.ll")});
  ::unsetenv("RVX_MATTR");
  auto plain = cli({"llc", source_path("corpus/shlxor.ll")});
  CHECK(env.out.find("shlxor\ta0, a0, a1") != std::string::npos);
  CHECK(plain.out.find("shlxor\ta0, a0, a1") == std::string::npos);
  ::setenv("RVX_MATTR", "+xcrypt", 1);
  auto overridden = cli({"llc", "--mattr=-xcrypt", source_path("corpus/shlxor.ll")});
  ::unsetenv("RVX_MATTR");
  CHECK(overridden.out == plain.out);
}

TEST_CASE("mc encodes and disassembles") {
  auto enc = cli({"mc", "--mattr=+xcrypt", "--show-encoding", "-"}, "shlxor s2, s2, s8\n");
  REQUIRE(enc.status == 0);
  CHECK(enc.out.find("shlxor\ts2, s2, s8") != std::string::npos);
  CHECK(enc.out.find("[0x33,0x79,0x89,0x31]") != std::string::npos);
  auto obj = cli({"mc", "--mattr=+xcrypt", "--filetype=obj", "-"}, "naxor a5, a4, a5, a2\n");
  REQUIRE(obj.status == 0);
  auto dis = cli({"mc", "--mattr=+xcrypt", "--disassemble", "-"}, obj.out);
  CHECK(dis.out.find("naxor\ta5, a4, a5, a2") != std::string::npos);
  CHECK(cli({"mc", "-"}, "naxor a5, a4, a5, a2\n").status == 1);
}

TEST_CASE("run executes compiled code and the interpreter") {
  auto o = cli({"run", "--mattr=+xcrypt", source_path("corpus/madd.ll")});
  REQUIRE(o.status == 0);
  CHECK(o.out.find("mem[0x00020000] = 0x000001b4") != std::string::npos);
  auto i = cli({"run", "--interp", source_path("corpus/madd.ll")});
  CHECK(i.out == o.out);
  auto rot = cli({"run", "--fn", "rotr2", "--args", "15", "--mattr=+zbb", source_path("corpus/rotimm.ll")});
  CHECK(rot.out.find("ret = 0xc0000003") != std::string::npos);
  CHECK(cli({"run", "--fn", "rotr2", source_path("corpus/rotimm.ll")}).status == 2);
}

TEST_CASE("dot export and isel trace") {
  auto dot = cli({"llc", "--emit=dot", "--dag-stage=built", "-O", "0", source_path("corpus/madd.ll")});
  REQUIRE(dot.status == 0);
  CHECK(dot.out.find(": mul:i32") != std::string::npos);
  auto trace = cli({"llc", "--debug-isel", "--mattr=+xcrypt", source_path("corpus/lxr.ll")});
  CHECK(trace.err.find("emitted ADDI + LXR") != std::string::npos);
}

TEST_CASE("filecheck and lit subcommands") {
  auto fc = cli({"filecheck", source_path("tests/mc/crypt.s"), "--check-prefixes=CHECK-ASM"},
                "\tshlxor s2, s2, s8\t# encoding: [0x33,0x79,0x89,0x31]\n");
  CHECK(fc.status == 0);
  auto lit = cli({"lit", source_path("tests/mc"), source_path("tests/llc")});
  CHECK(lit.status == 0);
  CHECK(lit.out.find("Passed: ") != std::string::npos);
}
