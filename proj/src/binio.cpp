#include "cascade/binio.hpp"

#include "cascade/errors.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <vector>

namespace cascade::binio {

namespace {

constexpr bool kLittle = std::endian::native == std::endian::little;

void write_raw(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_raw(std::istream& in, void* p, std::size_t n, const std::string& context) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw DataError("truncated file while reading " + context);
  }
}

} // namespace

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_raw(out, b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_raw(out, b, 8);
}

void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<std::uint32_t>(v)); }

void write_string(std::ostream& out, const std::string& s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw UsageError("write_string: string too long");
  }
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  write_raw(out, s.data(), s.size());
}

void write_f32_array(std::ostream& out, const float* data, std::size_t n) {
  if constexpr (kLittle) {
    write_raw(out, data, n * sizeof(float));
  } else {
    for (std::size_t i = 0; i < n; ++i) write_f32(out, data[i]);
  }
}

std::uint32_t read_u32(std::istream& in, const std::string& context) {
  unsigned char b[4];
  read_raw(in, b, 4, context);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& in, const std::string& context) {
  unsigned char b[8];
  read_raw(in, b, 8, context);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

float read_f32(std::istream& in, const std::string& context) {
  return std::bit_cast<float>(read_u32(in, context));
}

std::string read_string(std::istream& in, const std::string& context) {
  const std::uint32_t len = read_u32(in, context);
  std::string s(len, '\0');
  if (len > 0) read_raw(in, s.data(), len, context);
  return s;
}

void read_f32_array(std::istream& in, float* data, std::size_t n, const std::string& context) {
  if constexpr (kLittle) {
    read_raw(in, data, n * sizeof(float), context);
  } else {
    for (std::size_t i = 0; i < n; ++i) data[i] = read_f32(in, context);
  }
}

} // namespace cascade::binio
