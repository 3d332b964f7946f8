#include <doctest.h>

#include "helpers.hpp"
#include "tlscheck/pe.hpp"

using namespace tlscheck;
using testutil::basic_spec;
using testutil::classic_x86_spec;

TEST_SUITE("pe") {

TEST_CASE("parse_image decodes a forged 32-bit header") {
    auto bytes = forge::forge(basic_spec());
    PeImage img = parse_image(bytes);
    CHECK(img.arch == Arch::X86);
    CHECK(img.image_base == 0x400000);
    CHECK(img.layout == Layout::FileLayout);
    CHECK(img.sections.size() == 2);
    CHECK(img.sections[0].name == ".text");
    CHECK(img.sections[0].virtual_address == 0x1000);
    CHECK(img.sections[1].name == ".rdata");
    CHECK(img.size_of_image == 0x3000);
}

TEST_CASE("parse_image decodes a forged 64-bit header") {
    auto bytes = forge::forge(basic_spec(Arch::X64));
    PeImage img = parse_image(bytes);
    CHECK(img.arch == Arch::X64);
    CHECK(img.image_base == 0x140000000ull);
}

TEST_CASE("parse_image rejects non-PE input") {
    std::vector<uint8_t> zip = {'P', 'K', 3, 4, 0, 0, 0, 0};
    CHECK_THROWS_AS(parse_image(zip), PeParseError);
    try {
        parse_image(zip);
    } catch (const PeParseError& e) {
        CHECK(e.code() == PeErrorCode::NotPe);
    }
    CHECK_THROWS_AS(parse_image(std::vector<uint8_t>{}), PeParseError);
}

TEST_CASE("parse_image rejects e_lfanew past the input") {
    auto bytes = forge::forge(basic_spec());
    // e_lfanew at 0x3c
    uint32_t bogus = uint32_t(bytes.size() + 1);
    for (int i = 0; i < 4; ++i) bytes[0x3c + i] = uint8_t(bogus >> (8 * i));
    try {
        parse_image(bytes);
        FAIL("expected PeParseError");
    } catch (const PeParseError& e) {
        CHECK(e.code() == PeErrorCode::Truncated);
    }
}

TEST_CASE("parse_image rejects unknown optional header magic") {
    auto bytes = forge::forge(basic_spec());
    // optional header magic sits right after the 20-byte file header
    size_t opt = 0x40 + 4 + 20;
    bytes[opt] = 0x0B;
    bytes[opt + 1] = 0x03; // 0x30B: ROM image
    try {
        parse_image(bytes);
        FAIL("expected PeParseError");
    } catch (const PeParseError& e) {
        CHECK(e.code() == PeErrorCode::UnsupportedMagic);
    }
}

TEST_CASE("parse_image is pure") {
    auto bytes = forge::forge(classic_x86_spec());
    auto copy = bytes;
    PeImage a = parse_image(bytes);
    PeImage b = parse_image(bytes);
    CHECK(bytes == copy);
    CHECK(a.image_base == b.image_base);
    CHECK(a.sections.size() == b.sections.size());
    for (size_t i = 0; i < a.sections.size(); ++i) {
        CHECK(a.sections[i].virtual_address == b.sections[i].virtual_address);
        CHECK(a.sections[i].pointer_to_raw_data == b.sections[i].pointer_to_raw_data);
    }
    CHECK(a.data_directories == b.data_directories);
}

TEST_CASE("rva_to_offset translates through the section table") {
    auto bytes = forge::forge(basic_spec());
    PeImage img = parse_image(bytes);
    // .text: VA 0x1000, raw pointer 0x400 in the default layout
    uint32_t raw = img.sections[0].pointer_to_raw_data;
    auto off = rva_to_offset(img, 0x1010);
    REQUIRE(off.ok());
    CHECK(*off == raw + 0x10);

    SUBCASE("header region maps identically") {
        auto hdr = rva_to_offset(img, 0x40);
        REQUIRE(hdr.ok());
        CHECK(*hdr == 0x40);
    }
    SUBCASE("unmapped rva") {
        auto bad = rva_to_offset(img, 0xFFFFFF);
        CHECK(!bad.ok());
        CHECK(bad.error == TranslateError::Unmapped);
    }
}

TEST_CASE("rva_to_offset is identity for memory layout") {
    auto bytes = forge::forge(basic_spec(Arch::X86, Layout::MemoryLayout));
    PeImage img = parse_image(bytes, {LayoutChoice::Memory, std::nullopt});
    for (uint32_t rva : {0x0u, 0x400u, 0x1000u, 0x2180u, 0x2fffu}) {
        auto off = rva_to_offset(img, rva);
        REQUIRE(off.ok());
        CHECK(*off == rva);
    }
}

TEST_CASE("rva/offset round trip across every section rva") {
    auto bytes = forge::forge(classic_x86_spec());
    PeImage img = parse_image(bytes);
    // independent inverse built from the same section table
    auto offset_to_rva = [&](uint64_t off) -> std::optional<uint32_t> {
        for (const auto& s : img.sections) {
            if (off >= s.pointer_to_raw_data && off < uint64_t(s.pointer_to_raw_data) + s.size_of_raw_data)
                return uint32_t(s.virtual_address + (off - s.pointer_to_raw_data));
        }
        return std::nullopt;
    };
    size_t checked = 0;
    for (const auto& s : img.sections) {
        for (uint32_t rva = s.virtual_address; rva < s.virtual_address + s.virtual_extent(); rva += 7) {
            auto off = rva_to_offset(img, rva);
            if (!off.ok()) continue;
            auto back = offset_to_rva(*off);
            REQUIRE(back.has_value());
            CHECK(*back == rva);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("va_to_rva subtracts the image base") {
    auto bytes = forge::forge(basic_spec());
    PeImage img = parse_image(bytes);
    auto rva = va_to_rva(img, 0x401000);
    REQUIRE(rva.ok());
    CHECK(*rva == 0x1000);
    auto zero = va_to_rva(img, 0x400000);
    REQUIRE(zero.ok());
    CHECK(*zero == 0);
    auto below = va_to_rva(img, 0x300000);
    CHECK(!below.ok());
    CHECK(below.error == TranslateError::OutOfImage);
    CHECK(!va_to_rva(img, img.image_base + img.size_of_image).ok());
}

TEST_CASE("data_directory returns zeros for absent entries") {
    auto bytes = forge::forge(basic_spec());
    PeImage img = parse_image(bytes);
    CHECK(data_directory(img, kTlsDirectoryIndex).virtual_address == 0);
    CHECK(data_directory(img, kTlsDirectoryIndex).size == 0);
    CHECK(!data_directory(img, kTlsDirectoryIndex).present());
}

TEST_CASE("data_directory exposes the forged TLS entry") {
    auto bytes = forge::forge(classic_x86_spec());
    PeImage img = parse_image(bytes);
    auto entry = data_directory(img, kTlsDirectoryIndex);
    CHECK(entry.virtual_address == 0x2180);
    CHECK(entry.size == 0x18);
}

TEST_CASE("auto layout picks memory when raw pointers overflow the input") {
    forge::ForgeSpec spec = basic_spec(Arch::X86, Layout::MemoryLayout);
    spec.memory_disk_raw_pointers = true;
    // declared raw size far beyond the dump length
    spec.sections[0].raw_size = 0x8000;
    auto bytes = forge::forge(spec);
    PeImage img = parse_image(bytes);
    CHECK(img.layout == Layout::MemoryLayout);

    SUBCASE("explicit file choice wins over detection") {
        PeImage forced = parse_image(bytes, {LayoutChoice::File, std::nullopt});
        CHECK(forced.layout == Layout::FileLayout);
    }
}

TEST_CASE("auto layout keeps file layout for on-disk images") {
    auto bytes = forge::forge(classic_x86_spec());
    PeImage img = parse_image(bytes);
    CHECK(img.layout == Layout::FileLayout);
}

TEST_CASE("image base override applies") {
    auto bytes = forge::forge(basic_spec());
    ParseOptions opts;
    opts.image_base_override = 0x500000;
    PeImage img = parse_image(bytes, opts);
    CHECK(img.image_base == 0x500000);
    CHECK(!img.warnings.empty());
}

TEST_CASE("parse_imports resolves forged IAT slots") {
    auto bytes = forge::forge(classic_x86_spec());
    PeImage img = parse_image(bytes);
    auto imports = parse_imports(img);
    CHECK(!imports.malformed);
    REQUIRE(imports.map.count(0x402098) == 1);
    CHECK(imports.map.at(0x402098) == "KERNEL32.dll!ExitProcess");
}

TEST_CASE("parse_imports handles several dlls and ordinals") {
    forge::ForgeSpec spec = basic_spec(Arch::X64);
    spec.imports = {
        {"KERNEL32.dll", "ExitProcess", 0x2098},
        {"KERNEL32.dll", "VirtualAlloc", 0x20A0},
        {"USER32.dll", "#42", 0x20C0},
    };
    auto bytes = forge::forge(spec);
    PeImage img = parse_image(bytes);
    auto imports = parse_imports(img);
    CHECK(!imports.malformed);
    CHECK(imports.map.at(spec.image_base + 0x2098) == "KERNEL32.dll!ExitProcess");
    CHECK(imports.map.at(spec.image_base + 0x20A0) == "KERNEL32.dll!VirtualAlloc");
    CHECK(imports.map.at(spec.image_base + 0x20C0) == "USER32.dll!#42");
}

TEST_CASE("parse_imports without an import directory is empty") {
    auto bytes = forge::forge(basic_spec());
    PeImage img = parse_image(bytes);
    auto imports = parse_imports(img);
    CHECK(imports.map.empty());
    CHECK(!imports.malformed);
}

TEST_CASE("parse_imports degrades to a partial map on corrupt descriptors") {
    forge::ForgeSpec spec = basic_spec();
    spec.imports = {{"KERNEL32.dll", "ExitProcess", 0x2098}};
    auto bytes = forge::forge(spec);
    PeImage img = parse_image(bytes);

    // corrupt the descriptor's name rva to point far outside the image
    auto dir = data_directory(img, kImportDirectoryIndex);
    auto desc_off = rva_to_offset(img, dir.virtual_address);
    REQUIRE(desc_off.ok());
    auto mutated = bytes;
    uint32_t bogus = 0x00FFFFFF;
    for (int i = 0; i < 4; ++i) mutated[*desc_off + 12 + i] = uint8_t(bogus >> (8 * i));

    PeImage bad = parse_image(mutated);
    auto imports = parse_imports(bad);
    CHECK(imports.malformed);
    CHECK(!imports.warnings.empty());
}

} // TEST_SUITE
