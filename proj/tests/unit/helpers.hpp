#pragma once

#include <random>
#include <string>
#include <vector>

#include "tlscheck/forge.hpp"
#include "tlscheck/pe.hpp"

namespace testutil {

using namespace tlscheck;

// Two-section spec (.text at 0x1000, .rdata at 0x2000) mirroring the layout
// most of the fixtures use.
inline forge::ForgeSpec basic_spec(Arch arch = Arch::X86, Layout layout = Layout::FileLayout) {
    forge::ForgeSpec spec;
    spec.arch = arch;
    spec.layout = layout;
    spec.image_base = arch == Arch::X64 ? 0x140000000ull : 0x400000ull;
    spec.sections = {
        {".text", 0x1000, 0x1000, std::nullopt, {}, forge::kCodeSection},
        {".rdata", 0x2000, 0x1000, std::nullopt, {}, forge::kDataSection},
    };
    return spec;
}

inline std::vector<uint8_t> from_hex(const std::string& hex) {
    std::vector<uint8_t> out;
    std::string clean;
    for (char c : hex)
        if (!isspace(static_cast<unsigned char>(c))) clean.push_back(c);
    for (size_t i = 0; i + 1 < clean.size(); i += 2)
        out.push_back(uint8_t(std::stoul(clean.substr(i, 2), nullptr, 16)));
    return out;
}

// The classic single-callback x86 image: callback code at rva 0x1000, TLS
// directory at 0x2180, one import with its IAT slot at 0x2098.
inline forge::ForgeSpec classic_x86_spec() {
    forge::ForgeSpec spec = basic_spec();
    spec.tls = forge::ForgeTls{{0x1000}, true, false, 0x2180, 0};
    spec.imports = {{"KERNEL32.dll", "ExitProcess", 0x2098}};
    spec.callback_code[0x1000] = from_hex(
        "64 a1 2c 00 00 00 6a 00 68 10 21 40 00 68 10 21"
        "40 00 8b 00 6a 00 c7 40 04 1f 02 00 00 ff 15 98"
        "20 40 00 c2 0c 00 cc cc cc cc cc cc cc cc cc cc"
        "64 a1 2c 00 00 00 8b 00 ff 70 04 68 20 21 40 00");
    return spec;
}

} // namespace testutil
