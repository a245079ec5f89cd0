#pragma once
// Byte-string utilities and the canonical integer encoding shared by the
// PRF, hash, commitment and serialization layers.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace vhtlp {

using Bytes = std::vector<std::uint8_t>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Bytes concat(const Bytes& a, const Bytes& b) {
    Bytes out(a);
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline void append(Bytes& dst, const Bytes& src) {
    dst.insert(dst.end(), src.begin(), src.end());
}

inline Bytes from_string(const std::string& s) {
    return Bytes(s.begin(), s.end());
}

inline Bytes be32(std::uint32_t v) {
    return Bytes{static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                 static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

inline Bytes be64(std::uint64_t v) {
    Bytes out(8);
    for (int i = 7; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

// Minimal big-endian magnitude of a non-negative integer; 0 encodes as empty.
inline Bytes int_magnitude(const mpz_class& v) {
    if (v < 0) throw Error("int_magnitude: negative integer");
    if (v == 0) return {};
    std::size_t count = 0;
    Bytes buf((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
    mpz_export(buf.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    buf.resize(count);
    return buf;
}

inline mpz_class int_from_bytes(const std::uint8_t* data, std::size_t len) {
    mpz_class v;
    if (len > 0) mpz_import(v.get_mpz_t(), len, 1, 1, 1, 0, data);
    return v;
}

inline mpz_class int_from_bytes(const Bytes& b) { return int_from_bytes(b.data(), b.size()); }

// Canonical encoding: 4-byte big-endian length prefix followed by the
// big-endian magnitude. "a||b" in protocol descriptions is the
// concatenation of the encodings, which is decodable left to right.
inline Bytes encode_int(const mpz_class& v) {
    Bytes mag = int_magnitude(v);
    Bytes out = be32(static_cast<std::uint32_t>(mag.size()));
    append(out, mag);
    return out;
}

inline Bytes encode_int(std::uint64_t v) { return encode_int(mpz_class(static_cast<unsigned long>(v))); }

// Length-prefixed byte string, used where raw bytes join an encoded stream.
inline Bytes encode_bytes(const Bytes& b) {
    Bytes out = be32(static_cast<std::uint32_t>(b.size()));
    append(out, b);
    return out;
}

inline std::string to_hex(const Bytes& b) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (std::uint8_t byte : b) {
        out.push_back(digits[byte >> 4]);
        out.push_back(digits[byte & 0xf]);
    }
    return out;
}

inline Bytes from_hex(const std::string& s) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.size() % 2 != 0) throw Error("from_hex: odd length");
    Bytes out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(s[2 * i]), lo = nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error("from_hex: bad digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

}  // namespace vhtlp
