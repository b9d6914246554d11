#pragma once

// Little-endian primitives shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace jsct::detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xFF);
  os.write(buf, 8);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
  char buf[4];
  for (int b = 0; b < 4; ++b) buf[b] = static_cast<char>((v >> (8 * b)) & 0xFF);
  os.write(buf, 4);
}

inline void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline void put_f32(std::ostream& os, float v) { put_u32(os, std::bit_cast<std::uint32_t>(v)); }

inline std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("unexpected end of file");
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | buf[b];
  return v;
}

inline std::uint32_t get_u32(std::istream& is) {
  unsigned char buf[4];
  if (!is.read(reinterpret_cast<char*>(buf), 4)) throw std::runtime_error("unexpected end of file");
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | buf[b];
  return v;
}

inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }

}  // namespace jsct::detail
