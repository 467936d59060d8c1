#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rvx {

// Raised for malformed input and for requests the pipeline cannot honor.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline int32_t sign_extend(uint32_t value, unsigned bits) {
  uint32_t m = 1u << (bits - 1);
  value &= (bits == 32) ? 0xFFFFFFFFu : ((1u << bits) - 1);
  return static_cast<int32_t>((value ^ m) - m);
}

inline bool fits_signed(int64_t v, unsigned bits) {
  int64_t lo = -(int64_t{1} << (bits - 1));
  int64_t hi = (int64_t{1} << (bits - 1)) - 1;
  return v >= lo && v <= hi;
}

inline bool fits_unsigned(int64_t v, unsigned bits) {
  return v >= 0 && v < (int64_t{1} << bits);
}

inline uint32_t rotr32(uint32_t x, unsigned n) {
  n &= 31;
  return n == 0 ? x : (x >> n) | (x << (32 - n));
}

// Fixed address map shared by the IR interpreter, the code generator and the
// simulator so that compiled code and IR agree on where globals live.
inline constexpr uint32_t kTextBase = 0x00010000;
inline constexpr uint32_t kDataBase = 0x00020000;
inline constexpr uint32_t kArgBufferBase = 0x00040000;
inline constexpr uint32_t kStackLimit = 0x00700000;
inline constexpr uint32_t kStackTop = 0x00800000;
inline constexpr uint32_t kHaltSentinel = 0xDEAD0000;

}  // namespace rvx
