#include "tlscheck/pe.hpp"

#include <algorithm>

namespace tlscheck {

namespace {

constexpr uint16_t kDosMagic = 0x5A4D;      // 'MZ'
constexpr uint32_t kNtSignature = 0x00004550; // 'PE\0\0'
constexpr uint16_t kMagicPe32 = 0x10B;
constexpr uint16_t kMagicPe32Plus = 0x20B;

[[noreturn]] void fail(PeErrorCode code, const std::string& what) {
    throw PeParseError(code, what);
}

std::string section_name(ByteSpan raw, uint64_t off) {
    std::string name;
    for (uint64_t i = 0; i < 8 && off + i < raw.size(); ++i) {
        char c = static_cast<char>(raw[off + i]);
        if (c == '\0') break;
        name.push_back(c);
    }
    return name;
}

} // namespace

const char* arch_name(Arch arch) { return arch == Arch::X86 ? "x86" : "x64"; }

PeImage parse_image(ByteSpan bytes, const ParseOptions& options) {
    if (bytes.empty()) fail(PeErrorCode::NotPe, "empty input");
    ByteReader r(bytes);

    auto dos_magic = r.u16(0);
    if (!dos_magic || *dos_magic != kDosMagic)
        fail(PeErrorCode::NotPe, "missing MZ signature");

    auto e_lfanew = r.u32(0x3C);
    if (!e_lfanew) fail(PeErrorCode::Truncated, "DOS header truncated");
    uint64_t nt = *e_lfanew;
    if (!r.in_bounds(nt, 4 + 20 + 2))
        fail(PeErrorCode::Truncated, "e_lfanew points past input");

    if (*r.u32(nt) != kNtSignature)
        fail(PeErrorCode::NotPe, "missing PE signature");

    uint64_t file_hdr = nt + 4;
    uint16_t n_sections = *r.u16(file_hdr + 2);
    uint16_t opt_size = *r.u16(file_hdr + 16);

    uint64_t opt = file_hdr + 20;
    if (!r.in_bounds(opt, opt_size))
        fail(PeErrorCode::Truncated, "optional header extends past input");

    auto opt_magic = r.u16(opt);
    if (!opt_magic) fail(PeErrorCode::Truncated, "optional header truncated");

    PeImage img;
    uint64_t dir_off = 0;
    size_t declared_dirs = 0;
    if (*opt_magic == kMagicPe32) {
        img.arch = Arch::X86;
        if (opt_size < 0x60) fail(PeErrorCode::Truncated, "optional header too small");
        img.entry_point_rva = *r.u32(opt + 0x10);
        img.image_base = *r.u32(opt + 0x1C);
        img.size_of_image = *r.u32(opt + 0x38);
        declared_dirs = *r.u32(opt + 0x5C);
        dir_off = opt + 0x60;
    } else if (*opt_magic == kMagicPe32Plus) {
        img.arch = Arch::X64;
        if (opt_size < 0x70) fail(PeErrorCode::Truncated, "optional header too small");
        img.entry_point_rva = *r.u32(opt + 0x10);
        img.image_base = *r.u64(opt + 0x18);
        img.size_of_image = *r.u32(opt + 0x38);
        declared_dirs = *r.u32(opt + 0x6C);
        dir_off = opt + 0x70;
    } else {
        fail(PeErrorCode::UnsupportedMagic, "optional header magic not 0x10b/0x20b");
    }

    size_t n_dirs = std::min(declared_dirs, kDataDirectoryCount);
    for (size_t i = 0; i < n_dirs; ++i) {
        uint64_t entry = dir_off + i * 8;
        // Entries past the declared optional header stay zeroed.
        if (entry + 8 > opt + opt_size) break;
        img.data_directories[i].virtual_address = *r.u32(entry);
        img.data_directories[i].size = *r.u32(entry + 4);
    }

    size_t keep_sections = n_sections;
    if (keep_sections > kMaxSections) {
        keep_sections = kMaxSections;
        img.warnings.push_back("section count capped at 96");
    }
    uint64_t sect_off = opt + opt_size;
    if (!r.in_bounds(sect_off, keep_sections * 40ull))
        fail(PeErrorCode::Truncated, "section table extends past input");

    img.sections.reserve(keep_sections);
    for (size_t i = 0; i < keep_sections; ++i) {
        uint64_t s = sect_off + i * 40;
        SectionHeader sh;
        sh.name = section_name(bytes, s);
        sh.virtual_size = *r.u32(s + 8);
        sh.virtual_address = *r.u32(s + 12);
        sh.size_of_raw_data = *r.u32(s + 16);
        sh.pointer_to_raw_data = *r.u32(s + 20);
        sh.characteristics = *r.u32(s + 36);
        img.sections.push_back(sh);
    }

    if (options.image_base_override) {
        img.image_base = *options.image_base_override;
        img.warnings.push_back("image base overridden to " + hex_va(img.image_base));
    }

    switch (options.layout) {
    case LayoutChoice::File:
        img.layout = Layout::FileLayout;
        break;
    case LayoutChoice::Memory:
        img.layout = Layout::MemoryLayout;
        break;
    case LayoutChoice::Auto: {
        bool raw_overflows = false;
        bool virtual_fits = true;
        for (const auto& s : img.sections) {
            uint64_t raw_end = uint64_t(s.pointer_to_raw_data) + s.size_of_raw_data;
            if (s.size_of_raw_data != 0 && raw_end > bytes.size()) raw_overflows = true;
            uint64_t vsize = s.virtual_size ? s.virtual_size : s.size_of_raw_data;
            if (uint64_t(s.virtual_address) + vsize > bytes.size()) virtual_fits = false;
        }
        if (raw_overflows && virtual_fits) {
            img.layout = Layout::MemoryLayout;
            img.warnings.push_back("layout auto-detected as memory (raw pointers exceed input)");
        } else {
            img.layout = Layout::FileLayout;
        }
        break;
    }
    }

    img.raw.assign(bytes.begin(), bytes.end());
    return img;
}

Translated<uint64_t> rva_to_offset(const PeImage& img, uint32_t rva) {
    uint64_t offset = 0;
    if (img.layout == Layout::MemoryLayout) {
        offset = rva;
    } else {
        uint32_t first_section_rva = UINT32_MAX;
        for (const auto& s : img.sections) {
            if (s.virtual_address != 0)
                first_section_rva = std::min(first_section_rva, s.virtual_address);
        }
        const SectionHeader* hit = nullptr;
        for (const auto& s : img.sections) {
            if (s.virtual_address == 0) continue;
            if (rva >= s.virtual_address && uint64_t(rva) < uint64_t(s.virtual_address) + s.virtual_extent()) {
                hit = &s;
                break;
            }
        }
        if (hit) {
            offset = uint64_t(hit->pointer_to_raw_data) + (rva - hit->virtual_address);
        } else if (rva < first_section_rva) {
            offset = rva; // header region maps identically
        } else {
            return {std::nullopt, TranslateError::Unmapped};
        }
    }
    if (offset >= img.raw.size()) return {std::nullopt, TranslateError::OutOfFile};
    return {offset, TranslateError::Unmapped};
}

Translated<uint32_t> va_to_rva(const PeImage& img, uint64_t va) {
    if (va < img.image_base || va >= img.image_base + img.size_of_image)
        return {std::nullopt, TranslateError::OutOfImage};
    return {static_cast<uint32_t>(va - img.image_base), TranslateError::OutOfImage};
}

DataDirectoryEntry data_directory(const PeImage& img, size_t index) {
    if (index >= kDataDirectoryCount) return {};
    return img.data_directories[index];
}

IatParseResult parse_imports(const PeImage& img) {
    IatParseResult result;
    DataDirectoryEntry dir = data_directory(img, kImportDirectoryIndex);
    if (!dir.present()) return result;

    ByteReader r(img.raw);
    size_t ptr_size = img.arch == Arch::X64 ? 8 : 4;
    uint64_t ordinal_bit = img.arch == Arch::X64 ? (1ull << 63) : (1ull << 31);

    auto mark_malformed = [&](const std::string& why) {
        result.malformed = true;
        result.warnings.push_back("import table: " + why);
    };

    for (size_t di = 0; di < kMaxImportDescriptors; ++di) {
        auto desc_off = rva_to_offset(img, dir.virtual_address + static_cast<uint32_t>(di * 20));
        if (!desc_off.ok()) {
            mark_malformed("descriptor outside image");
            break;
        }
        auto oft = r.u32(*desc_off);
        auto name_rva = r.u32(*desc_off + 12);
        auto ft = r.u32(*desc_off + 16);
        if (!oft || !name_rva || !ft) {
            mark_malformed("descriptor truncated");
            break;
        }
        if (*name_rva == 0 && *ft == 0 && *oft == 0) break; // terminator

        std::string dll;
        if (auto name_off = rva_to_offset(img, *name_rva); name_off.ok()) {
            if (auto s = r.cstring(*name_off)) dll = *s;
        }
        if (dll.empty()) {
            mark_malformed("descriptor name unreadable");
            continue;
        }

        // Names come from the import lookup table when present, else from the
        // IAT itself (on-disk images keep both pointing at hint/name entries).
        uint32_t lookup_rva = *oft ? *oft : *ft;
        constexpr size_t kMaxThunks = 4096;
        for (size_t ti = 0; ti < kMaxThunks; ++ti) {
            auto thunk_off = rva_to_offset(img, lookup_rva + static_cast<uint32_t>(ti * ptr_size));
            if (!thunk_off.ok()) {
                mark_malformed("thunk array for " + dll + " outside image");
                break;
            }
            uint64_t entry = 0;
            if (ptr_size == 8) {
                auto v = r.u64(*thunk_off);
                if (!v) { mark_malformed("thunk truncated in " + dll); break; }
                entry = *v;
            } else {
                auto v = r.u32(*thunk_off);
                if (!v) { mark_malformed("thunk truncated in " + dll); break; }
                entry = *v;
            }
            if (entry == 0) break;

            std::string label;
            if (entry & ordinal_bit) {
                label = dll + "!#" + std::to_string(entry & 0xFFFF);
            } else {
                auto hint_off = rva_to_offset(img, static_cast<uint32_t>(entry));
                std::optional<std::string> fn;
                if (hint_off.ok()) fn = r.cstring(*hint_off + 2, 512);
                if (!fn) {
                    mark_malformed("name entry unreadable in " + dll);
                    continue;
                }
                label = dll + "!" + *fn;
            }
            uint64_t slot_va = img.image_base + *ft + ti * ptr_size;
            result.map[slot_va] = label;
        }
    }
    return result;
}

} // namespace tlscheck
