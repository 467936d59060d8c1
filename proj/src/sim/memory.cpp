#include <fmt/format.h>

#include "rvx/sim.h"

namespace rvx {

uint8_t Memory::read8(uint32_t addr) const {
  auto it = bytes_.find(addr);
  return it == bytes_.end() ? 0 : it->second;
}

void Memory::write8(uint32_t addr, uint8_t v) { bytes_[addr] = v; }

uint32_t Memory::read32(uint32_t addr) const {
  if (addr & 3u) throw Error(fmt::format("misaligned load from 0x{:08x}", addr));
  uint32_t v = 0;
  for (uint32_t i = 0; i < 4; ++i) v |= static_cast<uint32_t>(read8(addr + i)) << (8 * i);
  return v;
}

void Memory::write32(uint32_t addr, uint32_t v) {
  if (addr & 3u) throw Error(fmt::format("misaligned store to 0x{:08x}", addr));
  for (uint32_t i = 0; i < 4; ++i) write8(addr + i, static_cast<uint8_t>(v >> (8 * i)));
}

void Memory::write_bytes(uint32_t addr, const std::vector<uint8_t>& bytes) {
  for (size_t i = 0; i < bytes.size(); ++i) write8(addr + static_cast<uint32_t>(i), bytes[i]);
}

std::map<uint32_t, uint8_t> Memory::observable() const {
  std::map<uint32_t, uint8_t> out;
  for (const auto& [a, v] : bytes_) {
    if (v == 0 || (a >= kStackLimit && a < kStackTop) || (a >= kTextBase && a < kDataBase)) continue;
    out.emplace(a, v);
  }
  return out;
}

Memory initial_memory(const IrModule& m) {
  Memory mem;
  for (size_t i = 0; i < m.globals.size(); ++i)
    mem.write32(global_address(static_cast<int>(i)), static_cast<uint32_t>(m.globals[i].initializer));
  return mem;
}

}  // namespace rvx
