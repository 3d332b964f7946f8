#pragma once

#include <cstdint>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tlscheck {

using ByteSpan = std::span<const uint8_t>;

// Bounds-checked little-endian reader over a byte span. All reads return
// nullopt instead of touching memory outside the span.
class ByteReader {
public:
    explicit ByteReader(ByteSpan data) : data_(data) {}

    size_t size() const { return data_.size(); }

    bool in_bounds(uint64_t offset, uint64_t len) const {
        return offset <= data_.size() && len <= data_.size() - offset;
    }

    std::optional<uint8_t> u8(uint64_t off) const {
        if (!in_bounds(off, 1)) return std::nullopt;
        return data_[off];
    }
    std::optional<uint16_t> u16(uint64_t off) const {
        if (!in_bounds(off, 2)) return std::nullopt;
        return static_cast<uint16_t>(data_[off] | (uint16_t(data_[off + 1]) << 8));
    }
    std::optional<uint32_t> u32(uint64_t off) const {
        if (!in_bounds(off, 4)) return std::nullopt;
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | data_[off + i];
        return v;
    }
    std::optional<uint64_t> u64(uint64_t off) const {
        if (!in_bounds(off, 8)) return std::nullopt;
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | data_[off + i];
        return v;
    }

    // Reads up to max_len bytes starting at off, clamped to the span end.
    std::vector<uint8_t> bytes(uint64_t off, uint64_t max_len) const {
        if (off >= data_.size()) return {};
        uint64_t n = std::min<uint64_t>(max_len, data_.size() - off);
        return std::vector<uint8_t>(data_.begin() + static_cast<ptrdiff_t>(off),
                                    data_.begin() + static_cast<ptrdiff_t>(off + n));
    }

    // NUL-terminated ASCII string at off, bounded by max_len; nullopt when the
    // terminator is not found inside the window.
    std::optional<std::string> cstring(uint64_t off, uint64_t max_len = 256) const {
        if (off >= data_.size()) return std::nullopt;
        uint64_t limit = std::min<uint64_t>(data_.size() - off, max_len);
        for (uint64_t i = 0; i < limit; ++i) {
            if (data_[off + i] == 0)
                return std::string(reinterpret_cast<const char*>(data_.data() + off), i);
        }
        return std::nullopt;
    }

private:
    ByteSpan data_;
};

std::string to_hex(uint64_t value);                    // lowercase, no 0x
std::string hex_va(uint64_t value);                    // 0x-prefixed lowercase
std::string bytes_to_hex(ByteSpan bytes);              // contiguous hex pairs
bool is_printable_ascii(uint8_t b);

// Classic 16-byte-per-row hex dump: hex pairs space separated, two-space
// gutter, ASCII column with '.' for non-printables.
std::string hex_dump(ByteSpan bytes);

} // namespace tlscheck
