#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rvx/ir.h"
#include "rvx/target.h"

namespace rvx {

// Sparse little-endian byte memory; never-written bytes read as zero.
class Memory {
public:
  uint8_t read8(uint32_t addr) const;
  void write8(uint32_t addr, uint8_t v);
  // Word accesses must be 4-byte aligned.
  uint32_t read32(uint32_t addr) const;
  void write32(uint32_t addr, uint32_t v);
  void write_bytes(uint32_t addr, const std::vector<uint8_t>& bytes);

  // Contents outside the text and stack regions, zero bytes dropped.
  std::map<uint32_t, uint8_t> observable() const;
  const std::map<uint32_t, uint8_t>& raw() const { return bytes_; }

private:
  std::map<uint32_t, uint8_t> bytes_;
};

inline uint32_t global_address(int index) { return kDataBase + 4u * static_cast<uint32_t>(index); }
inline uint32_t arg_buffer_address(int index) { return kArgBufferBase + 0x100u * static_cast<uint32_t>(index); }

// Memory holding every global's initializer at its fixed address.
Memory initial_memory(const IrModule& m);

struct IrRunResult {
  std::optional<uint32_t> ret;
  Memory memory;
};

// Direct evaluation of IR semantics with wrapping arithmetic. Throws Error on
// a read of poison, an over-wide shift, or a misaligned access.
IrRunResult ir_interpret(const IrModule& m, const IrFunction& f, const std::vector<uint32_t>& args,
                         Memory mem);

struct SimState {
  std::array<uint32_t, 32> regs{};
  uint32_t pc = kTextBase;
  Memory mem;
  bool halted = false;
};

struct TraceStep {
  uint32_t pc = 0;
  std::string text;    // disassembly
  std::string effect;  // "a0 <- 0x..." / "mem[0x...] <- 0x..."
};

// Executes one instruction. Throws Error on an undecodable word or a trap.
void step(SimState& s, const TargetDesc& td, TraceStep* trace = nullptr);

struct RunResult {
  uint32_t ret = 0;
  Memory memory;
  std::vector<TraceStep> trace;
  uint64_t steps = 0;
};

inline constexpr uint64_t kDefaultFuel = 1000000;

// Loads `program` at kTextBase, seeds a0.. with args, sp with kStackTop and
// ra with the halt sentinel, then runs from `entry` until the sentinel return.
RunResult run_function(const TargetDesc& td, const std::vector<uint32_t>& program, uint32_t entry,
                       const std::vector<uint32_t>& args, Memory mem, uint64_t fuel = kDefaultFuel,
                       bool keep_trace = false);

}  // namespace rvx
