#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlscheck/pe.hpp"

namespace tlscheck::forge {

// Characteristics defaults for synthesized sections.
inline constexpr uint32_t kCodeSection = 0x60000020; // CODE | EXECUTE | READ
inline constexpr uint32_t kDataSection = 0x40000040; // INITIALIZED_DATA | READ

struct ForgeSection {
    std::string name;
    uint32_t rva = 0;                    // must be 0x1000-aligned
    uint32_t virtual_size = 0;           // 0 = sized by content
    std::optional<uint32_t> raw_size;    // file layout only; 0x200-aligned default
    std::vector<uint8_t> content;
    uint32_t characteristics = kCodeSection;
};

struct ForgeTls {
    std::vector<uint32_t> callback_rvas;
    bool include_terminator = true;
    // Writes RVAs instead of VAs into AddressOfCallBacks to exercise the
    // extractor's nonstandard-rva retry path.
    bool store_as_rva_bug = false;
    uint32_t directory_rva = 0;          // 0 = auto-place
    uint32_t callbacks_array_rva = 0;    // 0 = directly after the directory
};

struct ForgeImport {
    std::string dll;
    std::string function;                // "#123" forges an ordinal import
    uint32_t iat_slot_rva = 0;
};

struct ForgeSpec {
    Arch arch = Arch::X86;
    Layout layout = Layout::FileLayout;
    uint64_t image_base = 0x400000;
    uint32_t entry_point_rva = 0;        // 0 = first section
    std::vector<ForgeSection> sections;  // empty = auto .text/.rdata pair
    std::optional<ForgeTls> tls;
    std::vector<ForgeImport> imports;
    uint32_t import_table_rva = 0;       // 0 = auto-place
    std::map<uint32_t, std::vector<uint8_t>> callback_code;
    // Memory layout keeps the file-layout raw pointers instead of rebasing
    // them onto RVAs; such dumps exercise auto layout detection.
    bool memory_disk_raw_pointers = false;
};

class ForgeError : public std::runtime_error {
public:
    explicit ForgeError(const std::string& what) : std::runtime_error(what) {}
};

// Emits a minimal PE image (file or memory layout). Deterministic: equal
// specs produce byte-identical output. Throws ForgeError on inconsistent
// specs (overlapping sections, structures outside any section, ...).
std::vector<uint8_t> forge(const ForgeSpec& spec);

} // namespace tlscheck::forge
