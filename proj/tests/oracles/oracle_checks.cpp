// Self-checks of the reference models against published values, so a
// mistake in an oracle cannot silently agree with the same mistake in the
// compiler.

#include <doctest.h>

#include "oracles.h"

TEST_CASE("bit-sliced S-box reproduces the 5-bit lookup table") {
  // ASCON S-box table, input x0 as the most significant bit.
  const uint32_t table[32] = {0x04, 0x0b, 0x1f, 0x14, 0x1a, 0x15, 0x09, 0x02, 0x1b, 0x05, 0x08,
                              0x12, 0x1d, 0x03, 0x06, 0x1c, 0x1e, 0x13, 0x07, 0x0e, 0x00, 0x0d,
                              0x11, 0x18, 0x10, 0x0c, 0x01, 0x19, 0x16, 0x0a, 0x0f, 0x17};
  // Each bit lane is an independent 5-bit S-box evaluation; put input v in
  // lane v.
  std::array<uint32_t, 5> x{};
  for (uint32_t v = 0; v < 32; ++v)
    for (int i = 0; i < 5; ++i) x[i] |= ((v >> (4 - i)) & 1u) << v;
  auto y = oracle::ascon_sbox(x);
  for (uint32_t v = 0; v < 32; ++v) {
    uint32_t out = 0;
    for (int i = 0; i < 5; ++i) out |= ((y[i] >> v) & 1u) << (4 - i);
    CAPTURE(v);
    CHECK(out == table[v]);
  }
}

TEST_CASE("rotation") {
  CHECK(oracle::rotate_right(15, 2) == 0xC0000003u);
  CHECK(oracle::rotate_right(0x12345678u, 0) == 0x12345678u);
  CHECK(oracle::rotate_right(1, 1) == 0x80000000u);
  CHECK(oracle::ascon_diffuse0(0) == 0u);
  CHECK(oracle::ascon_diffuse0(1) == (1u ^ (1u << 13) ^ (1u << 4)));
}

TEST_CASE("field packers reproduce known base encodings") {
  CHECK(oracle::pack_r(0, 0, 0, 0, 0, 0x33) == 0x00000033u);        // add x0, x0, x0
  CHECK(oracle::pack_r(0x20, 12, 11, 0, 10, 0x33) == 0x40c58533u);  // sub a0, a1, a2
  CHECK(oracle::pack_i(1, 10, 0, 10, 0x13) == 0x00150513u);         // addi a0, a0, 1
  CHECK(oracle::pack_i(-1, 0, 0, 10, 0x13) == 0xfff00513u);         // li a0, -1
  CHECK(oracle::pack_i(0, 11, 2, 10, 0x03) == 0x0005a503u);         // lw a0, 0(a1)
  CHECK(oracle::pack_s(0, 11, 10, 2, 0x23) == 0x00b52023u);         // sw a1, 0(a0)
  CHECK(oracle::pack_s(-4, 1, 2, 2, 0x23) == 0xfe112e23u);          // sw ra, -4(sp)
  CHECK(oracle::pack_u(0x12345, 10, 0x37) == 0x12345537u);          // lui a0, 0x12345
  CHECK(oracle::pack_i(0, 1, 0, 0, 0x67) == 0x00008067u);           // ret
  CHECK(oracle::pack_r4(3, 0, 2, 1, 0, 0, 0x43) == 0x18208043u);    // fmadd.s ft0, ft1, ft2, ft3, rne
}

TEST_CASE("shortest constant materialization") {
  CHECK(oracle::shortest_materialization(0) == 1);
  CHECK(oracle::shortest_materialization(2047) == 1);
  CHECK(oracle::shortest_materialization(static_cast<uint32_t>(-2048)) == 1);
  CHECK(oracle::shortest_materialization(4096) == 1);
  CHECK(oracle::shortest_materialization(2048) == 2);
  CHECK(oracle::shortest_materialization(0x12345678u) == 2);
  CHECK(oracle::shortest_materialization(12291) == 2);
}

TEST_CASE("hi/lo split") {
  auto a = oracle::split_address(0x12345FFFu);
  CHECK(a.hi == 0x12346u);
  CHECK(a.lo == -1);
  auto b = oracle::split_address(0x1000);
  CHECK(b.hi == 1u);
  CHECK(b.lo == 0);
  auto c = oracle::split_address(0x7FF);
  CHECK(c.hi == 0u);
  CHECK(c.lo == 0x7FF);
}
