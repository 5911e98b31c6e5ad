#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace cascade::binio {

// Little-endian primitives for the binary artifact files. Readers throw
// DataError with `context` in the message on truncation.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_string(std::ostream& out, const std::string& s); // u32 length + bytes
void write_f32_array(std::ostream& out, const float* data, std::size_t n);

std::uint32_t read_u32(std::istream& in, const std::string& context);
std::uint64_t read_u64(std::istream& in, const std::string& context);
float read_f32(std::istream& in, const std::string& context);
std::string read_string(std::istream& in, const std::string& context);
void read_f32_array(std::istream& in, float* data, std::size_t n, const std::string& context);

} // namespace cascade::binio
