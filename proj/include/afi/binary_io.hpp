#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "afi/error.hpp"

namespace afi::io {

// Little-endian primitives for the checkpoint formats.

inline void write_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(buf, 8);
}

inline void write_u32(std::ostream& os, std::uint32_t v) {
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(buf, 4);
}

inline void write_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }

inline void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline void write_f64s(std::ostream& os, std::span<const double> vs) {
    for (double v : vs) write_f64(os, v);
}

inline void write_magic(std::ostream& os, std::string_view magic) { os.write(magic.data(), static_cast<std::streamsize>(magic.size())); }

inline std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw InvalidInput("checkpoint: unexpected end of stream");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

inline std::uint32_t read_u32(std::istream& is) {
    unsigned char buf[4];
    if (!is.read(reinterpret_cast<char*>(buf), 4)) throw InvalidInput("checkpoint: unexpected end of stream");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

inline std::uint8_t read_u8(std::istream& is) {
    const int c = is.get();
    if (c == std::char_traits<char>::eof()) throw InvalidInput("checkpoint: unexpected end of stream");
    return static_cast<std::uint8_t>(c);
}

inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline std::vector<double> read_f64s(std::istream& is, std::size_t count) {
    std::vector<double> out(count);
    for (double& v : out) v = read_f64(is);
    return out;
}

inline void expect_magic(std::istream& is, std::string_view magic) {
    std::vector<char> buf(magic.size());
    if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size())) ||
        std::string_view(buf.data(), buf.size()) != magic)
        throw InvalidInput("checkpoint: bad magic, expected " + std::string(magic));
}

}  // namespace afi::io
