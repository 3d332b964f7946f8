#include "tlscheck/forge.hpp"

#include <algorithm>

namespace tlscheck::forge {

namespace {

constexpr uint32_t kSectionAlign = 0x1000;
constexpr uint32_t kFileAlign = 0x200;

uint32_t align_up(uint64_t v, uint32_t a) { return static_cast<uint32_t>((v + a - 1) & ~uint64_t(a - 1)); }

struct Writer {
    std::vector<uint8_t>& out;
    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) { for (int i = 0; i < 2; ++i) out.push_back(uint8_t(v >> (8 * i))); }
    void u32(uint32_t v) { for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i))); }
    void u64(uint64_t v) { for (int i = 0; i < 8; ++i) out.push_back(uint8_t(v >> (8 * i))); }
    void zeros(size_t n) { out.insert(out.end(), n, 0); }
    void pad_to(size_t off) {
        if (out.size() > off) throw ForgeError("internal: writer overshoot");
        out.resize(off, 0);
    }
};

// Working copy of a section whose content gets structures poked into it.
struct BuildSection {
    ForgeSection spec;
    uint32_t virtual_size = 0;
    uint32_t raw_size = 0;
    uint32_t raw_pointer = 0;
    std::vector<uint8_t> content;
    bool fixed_vsize = false;
};

class Builder {
public:
    explicit Builder(const ForgeSpec& spec) : spec_(spec) {}

    std::vector<uint8_t> build() {
        normalize_sections();
        lay_out_tls_and_imports();
        if (spec_.tls) poke_tls();
        poke_imports();
        for (const auto& [rva, code] : spec_.callback_code) poke(rva, code, "callback code");
        finalize_sizes();
        return emit();
    }

private:
    const ForgeSpec& spec_;
    std::vector<BuildSection> sections_;
    uint32_t tls_dir_rva_ = 0;
    uint32_t tls_array_rva_ = 0;
    uint32_t import_rva_ = 0;
    uint32_t import_size_ = 0;
    std::vector<uint8_t> import_blob_;
    std::vector<std::pair<uint32_t, uint64_t>> iat_slots_; // rva, on-disk value

    size_t ptr_size() const { return spec_.arch == Arch::X64 ? 8 : 4; }
    uint32_t tls_dir_size() const { return spec_.arch == Arch::X64 ? 0x28 : 0x18; }

    void normalize_sections() {
        if (spec_.sections.empty()) {
            ForgeSection text{".text", 0x1000, 0x1000, std::nullopt, {}, kCodeSection};
            ForgeSection rdata{".rdata", 0x2000, 0x1000, std::nullopt, {}, kDataSection};
            sections_.push_back({text, 0x1000, 0, 0, {}, true});
            sections_.push_back({rdata, 0x1000, 0, 0, {}, true});
        } else {
            for (const auto& s : spec_.sections) {
                if (s.rva == 0 || (s.rva % kSectionAlign) != 0)
                    throw ForgeError("section rva must be nonzero and 0x1000-aligned: " + s.name);
                if (s.name.size() > 8) throw ForgeError("section name longer than 8 bytes: " + s.name);
                BuildSection b{s, 0, 0, 0, s.content, s.virtual_size != 0};
                b.virtual_size = s.virtual_size ? s.virtual_size
                                                : std::max<uint32_t>(uint32_t(s.content.size()), 1);
                if (s.content.size() > b.virtual_size)
                    throw ForgeError("section content exceeds virtual size: " + s.name);
                sections_.push_back(std::move(b));
            }
        }
        std::sort(sections_.begin(), sections_.end(),
                  [](const BuildSection& a, const BuildSection& b) { return a.spec.rva < b.spec.rva; });
        for (size_t i = 1; i < sections_.size(); ++i) {
            uint64_t prev_end = sections_[i - 1].spec.rva + align_up(sections_[i - 1].virtual_size, kSectionAlign);
            if (sections_[i].spec.rva < prev_end)
                throw ForgeError("sections overlap in virtual space: " + sections_[i].spec.name);
        }
    }

    BuildSection* covering(uint32_t rva, uint32_t len) {
        for (auto& s : sections_) {
            uint64_t end = uint64_t(s.spec.rva) + align_up(s.virtual_size, kSectionAlign);
            if (rva >= s.spec.rva && uint64_t(rva) + len <= end) return &s;
        }
        return nullptr;
    }

    void poke(uint32_t rva, const std::vector<uint8_t>& bytes, const char* what) {
        BuildSection* s = covering(rva, uint32_t(bytes.size()));
        if (!s) throw ForgeError(std::string(what) + " at rva " + hex_va(rva) + " not covered by any section");
        uint32_t off = rva - s->spec.rva;
        uint64_t need = uint64_t(off) + bytes.size();
        if (s->fixed_vsize && need > align_up(s->virtual_size, kSectionAlign))
            throw ForgeError(std::string(what) + " exceeds section " + s->spec.name);
        if (need > s->content.size()) s->content.resize(need, 0);
        if (need > s->virtual_size) s->virtual_size = uint32_t(need);
        std::copy(bytes.begin(), bytes.end(), s->content.begin() + off);
    }

    std::vector<uint8_t> le_bytes(uint64_t v, size_t n) {
        std::vector<uint8_t> out(n);
        for (size_t i = 0; i < n; ++i) out[i] = uint8_t(v >> (8 * i));
        return out;
    }

    void lay_out_tls_and_imports() {
        // Auto-placed structures go into the last section (the data section
        // for the default pair).
        BuildSection& home = sections_.back();
        uint32_t cursor = home.spec.rva + 0x180;

        if (spec_.tls) {
            tls_dir_rva_ = spec_.tls->directory_rva ? spec_.tls->directory_rva : cursor;
            if (!spec_.tls->directory_rva) cursor += align_up(tls_dir_size(), 16);
            tls_array_rva_ = spec_.tls->callbacks_array_rva
                                 ? spec_.tls->callbacks_array_rva
                                 : align_up(tls_dir_rva_ + tls_dir_size(), uint32_t(ptr_size()));
            if (!spec_.tls->callbacks_array_rva)
                cursor = std::max<uint32_t>(cursor, tls_array_rva_ + uint32_t((spec_.tls->callback_rvas.size() + 1) * ptr_size()));
        }
        if (!spec_.imports.empty()) {
            import_rva_ = spec_.import_table_rva ? spec_.import_table_rva
                                                 : align_up(std::max(cursor, home.spec.rva + 0x400), 16);
            build_import_blob();
        }
    }

    void build_import_blob() {
        // Region layout: descriptors (+terminator), then per-import lookup
        // tables and name strings. One descriptor per import keeps arbitrary
        // IAT slot RVAs expressible.
        size_t n = spec_.imports.size();
        uint32_t desc_bytes = uint32_t((n + 1) * 20);
        import_size_ = desc_bytes;

        struct Aux { uint32_t ilt_rva; uint32_t name_rva; uint64_t ilt_entry; };
        std::vector<Aux> aux(n);
        uint32_t cursor = import_rva_ + desc_bytes;
        uint64_t ordinal_bit = spec_.arch == Arch::X64 ? (1ull << 63) : (1ull << 31);

        for (size_t i = 0; i < n; ++i) {
            const auto& imp = spec_.imports[i];
            cursor = align_up(cursor, uint32_t(ptr_size()));
            aux[i].ilt_rva = cursor;
            cursor += uint32_t(2 * ptr_size());
            if (!imp.function.empty() && imp.function[0] == '#') {
                aux[i].ilt_entry = ordinal_bit | (std::stoul(imp.function.substr(1)) & 0xFFFF);
                aux[i].name_rva = 0;
            } else {
                aux[i].name_rva = cursor;
                cursor += uint32_t(2 + imp.function.size() + 1); // hint + name + NUL
                aux[i].ilt_entry = aux[i].name_rva;
            }
        }
        std::vector<uint32_t> dll_rvas(n);
        for (size_t i = 0; i < n; ++i) {
            dll_rvas[i] = cursor;
            cursor += uint32_t(spec_.imports[i].dll.size() + 1);
        }
        uint32_t blob_size = cursor - import_rva_;

        import_blob_.assign(blob_size, 0);
        auto put32 = [&](uint32_t rva, uint32_t v) {
            uint32_t off = rva - import_rva_;
            for (int i = 0; i < 4; ++i) import_blob_[off + i] = uint8_t(v >> (8 * i));
        };
        auto put_ptr = [&](uint32_t rva, uint64_t v) {
            uint32_t off = rva - import_rva_;
            for (size_t i = 0; i < ptr_size(); ++i) import_blob_[off + i] = uint8_t(v >> (8 * i));
        };
        auto put_str = [&](uint32_t rva, const std::string& s) {
            uint32_t off = rva - import_rva_;
            std::copy(s.begin(), s.end(), import_blob_.begin() + off);
        };

        for (size_t i = 0; i < n; ++i) {
            uint32_t d = import_rva_ + uint32_t(i * 20);
            put32(d, aux[i].ilt_rva);
            put32(d + 12, dll_rvas[i]);
            put32(d + 16, spec_.imports[i].iat_slot_rva);
            put_ptr(aux[i].ilt_rva, aux[i].ilt_entry);
            if (aux[i].name_rva) put_str(aux[i].name_rva + 2, spec_.imports[i].function);
            put_str(dll_rvas[i], spec_.imports[i].dll);
            iat_slots_.emplace_back(spec_.imports[i].iat_slot_rva, aux[i].ilt_entry);
        }
    }

    void poke_tls() {
        const ForgeTls& tls = *spec_.tls;
        std::vector<uint8_t> dir;
        Writer w{dir};
        uint64_t array_field = tls.store_as_rva_bug ? tls_array_rva_
                                                    : spec_.image_base + tls_array_rva_;
        uint64_t raw_data_va = spec_.image_base + tls_dir_rva_;
        if (spec_.arch == Arch::X64) {
            w.u64(raw_data_va);
            w.u64(raw_data_va);
            w.u64(spec_.image_base + tls_dir_rva_ + 0x30);
            w.u64(array_field);
            w.u32(0);
            w.u32(0);
        } else {
            w.u32(uint32_t(raw_data_va));
            w.u32(uint32_t(raw_data_va));
            w.u32(uint32_t(spec_.image_base + tls_dir_rva_ + 0x30));
            w.u32(uint32_t(array_field));
            w.u32(0);
            w.u32(0);
        }
        poke(tls_dir_rva_, dir, "TLS directory");

        std::vector<uint8_t> array;
        for (uint32_t cb_rva : tls.callback_rvas) {
            if (!covering(cb_rva, 1))
                throw ForgeError("callback rva " + hex_va(cb_rva) + " not covered by any section");
            uint64_t value = tls.store_as_rva_bug ? cb_rva : spec_.image_base + cb_rva;
            auto b = le_bytes(value, ptr_size());
            array.insert(array.end(), b.begin(), b.end());
        }
        if (tls.include_terminator) {
            auto b = le_bytes(0, ptr_size());
            array.insert(array.end(), b.begin(), b.end());
        }
        if (!array.empty()) poke(tls_array_rva_, array, "TLS callback array");
    }

    void poke_imports() {
        if (spec_.imports.empty()) return;
        poke(import_rva_, import_blob_, "import table");
        // IAT slots mirror the lookup entries on disk. A zero terminator
        // follows each run of consecutive slots.
        std::sort(iat_slots_.begin(), iat_slots_.end());
        for (size_t i = 0; i < iat_slots_.size(); ++i) {
            poke(iat_slots_[i].first, le_bytes(iat_slots_[i].second, ptr_size()), "IAT slot");
            uint32_t next = iat_slots_[i].first + uint32_t(ptr_size());
            bool chained = i + 1 < iat_slots_.size() && iat_slots_[i + 1].first == next;
            if (!chained) poke(next, le_bytes(0, ptr_size()), "IAT terminator");
        }
    }

    void finalize_sizes() {
        for (auto& s : sections_) {
            if (s.content.size() < s.virtual_size && !s.fixed_vsize)
                s.content.resize(s.virtual_size, 0);
            uint32_t content_aligned = align_up(std::max<uint64_t>(s.content.size(), 1), kFileAlign);
            s.raw_size = s.spec.raw_size ? *s.spec.raw_size : content_aligned;
        }
    }

    uint32_t headers_size() const {
        uint32_t opt = spec_.arch == Arch::X64 ? 0xF0 : 0xE0;
        return uint32_t(0x40 + 4 + 20 + opt + sections_.size() * 40);
    }

    std::vector<uint8_t> emit() {
        uint32_t size_of_headers = align_up(headers_size(), kFileAlign);
        uint32_t size_of_image = kSectionAlign; // headers page
        for (const auto& s : sections_)
            size_of_image = std::max(size_of_image, s.spec.rva + align_up(s.virtual_size, kSectionAlign));

        // Raw pointers: sequential file placement for file layout; memory
        // layout rebases them onto RVAs unless disk pointers were requested.
        uint32_t raw_cursor = size_of_headers;
        std::vector<uint32_t> file_ptr(sections_.size());
        for (size_t i = 0; i < sections_.size(); ++i) {
            file_ptr[i] = raw_cursor;
            raw_cursor += sections_[i].raw_size;
        }
        for (size_t i = 0; i < sections_.size(); ++i) {
            auto& s = sections_[i];
            if (spec_.layout == Layout::FileLayout || spec_.memory_disk_raw_pointers) {
                s.raw_pointer = file_ptr[i];
            } else {
                s.raw_pointer = s.spec.rva;
                s.raw_size = s.virtual_size;
            }
        }

        uint32_t entry = spec_.entry_point_rva ? spec_.entry_point_rva : sections_.front().spec.rva;

        std::vector<uint8_t> out;
        Writer w{out};

        // DOS header
        w.u16(0x5A4D);
        w.zeros(0x3C - 2);
        w.u32(0x40); // e_lfanew

        // NT signature + file header
        w.u32(0x00004550);
        w.u16(spec_.arch == Arch::X64 ? 0x8664 : 0x014C);
        w.u16(uint16_t(sections_.size()));
        w.u32(0); // TimeDateStamp
        w.u32(0); // PointerToSymbolTable
        w.u32(0); // NumberOfSymbols
        w.u16(spec_.arch == Arch::X64 ? 0xF0 : 0xE0);
        w.u16(spec_.arch == Arch::X64 ? 0x0022 : 0x0102); // EXECUTABLE_IMAGE | (32BIT or LARGE_ADDRESS_AWARE)

        // Optional header
        if (spec_.arch == Arch::X64) {
            w.u16(0x20B);
            w.u8(14); w.u8(0);            // linker version
            w.u32(0); w.u32(0); w.u32(0); // code/data sizes
            w.u32(entry);
            w.u32(sections_.front().spec.rva); // BaseOfCode
            w.u64(spec_.image_base);
        } else {
            w.u16(0x10B);
            w.u8(14); w.u8(0);
            w.u32(0); w.u32(0); w.u32(0);
            w.u32(entry);
            w.u32(sections_.front().spec.rva);
            w.u32(0); // BaseOfData
            w.u32(uint32_t(spec_.image_base));
        }
        w.u32(kSectionAlign);
        w.u32(kFileAlign);
        w.u16(6); w.u16(0);   // OS version
        w.u16(0); w.u16(0);   // image version
        w.u16(6); w.u16(0);   // subsystem version
        w.u32(0);             // Win32VersionValue
        w.u32(size_of_image);
        w.u32(size_of_headers);
        w.u32(0);             // CheckSum
        w.u16(3);             // Subsystem: console
        w.u16(0);             // DllCharacteristics
        if (spec_.arch == Arch::X64) {
            w.u64(0x100000); w.u64(0x1000); w.u64(0x100000); w.u64(0x1000);
        } else {
            w.u32(0x100000); w.u32(0x1000); w.u32(0x100000); w.u32(0x1000);
        }
        w.u32(0);             // LoaderFlags
        w.u32(16);            // NumberOfRvaAndSizes

        std::array<DataDirectoryEntry, 16> dirs{};
        if (!spec_.imports.empty())
            dirs[kImportDirectoryIndex] = {import_rva_, uint32_t((spec_.imports.size() + 1) * 20)};
        if (spec_.tls) dirs[kTlsDirectoryIndex] = {tls_dir_rva_, tls_dir_size()};
        for (const auto& d : dirs) { w.u32(d.virtual_address); w.u32(d.size); }

        // Section table
        for (const auto& s : sections_) {
            char name[8] = {};
            std::copy(s.spec.name.begin(), s.spec.name.end(), name);
            for (char c : name) w.u8(uint8_t(c));
            w.u32(s.virtual_size);
            w.u32(s.spec.rva);
            w.u32(s.raw_size);
            w.u32(s.raw_pointer);
            w.u32(0); w.u32(0); w.u16(0); w.u16(0); // relocs / line numbers
            w.u32(s.spec.characteristics);
        }

        if (spec_.layout == Layout::FileLayout) {
            w.pad_to(size_of_headers);
            for (size_t i = 0; i < sections_.size(); ++i) {
                w.pad_to(file_ptr[i]);
                const auto& c = sections_[i].content;
                size_t n = std::min<size_t>(c.size(), sections_[i].raw_size);
                out.insert(out.end(), c.begin(), c.begin() + n);
                w.pad_to(file_ptr[i] + sections_[i].raw_size);
            }
        } else {
            if (out.size() > size_of_image) throw ForgeError("headers exceed image size");
            out.resize(size_of_image, 0);
            for (const auto& s : sections_) {
                if (uint64_t(s.spec.rva) + s.content.size() > out.size())
                    throw ForgeError("section content exceeds image size: " + s.spec.name);
                std::copy(s.content.begin(), s.content.end(), out.begin() + s.spec.rva);
            }
        }
        return out;
    }
};

} // namespace

std::vector<uint8_t> forge(const ForgeSpec& spec) {
    if (spec.tls) {
        for (uint32_t rva : spec.tls->callback_rvas)
            if (rva == 0) throw ForgeError("callback rva must be nonzero");
    }
    Builder b(spec);
    return b.build();
}

} // namespace tlscheck::forge
