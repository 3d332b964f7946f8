#include "tlscheck/bytes.hpp"

#include <cstdio>

namespace tlscheck {

std::string to_hex(uint64_t value) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string hex_va(uint64_t value) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string bytes_to_hex(ByteSpan bytes) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

bool is_printable_ascii(uint8_t b) { return b >= 0x20 && b <= 0x7E; }

std::string hex_dump(ByteSpan bytes) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    for (size_t row = 0; row < bytes.size(); row += 16) {
        size_t n = std::min<size_t>(16, bytes.size() - row);
        std::string hex;
        std::string ascii;
        for (size_t i = 0; i < n; ++i) {
            uint8_t b = bytes[row + i];
            if (i) hex.push_back(' ');
            hex.push_back(digits[b >> 4]);
            hex.push_back(digits[b & 0xF]);
            ascii.push_back(is_printable_ascii(b) ? static_cast<char>(b) : '.');
        }
        hex.resize(16 * 3 - 1, ' ');
        out += hex;
        out += "  ";
        out += ascii;
        out.push_back('\n');
    }
    return out;
}

} // namespace tlscheck
