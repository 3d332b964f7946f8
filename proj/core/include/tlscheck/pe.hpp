#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tlscheck/bytes.hpp"

namespace tlscheck {

enum class Arch { X86, X64 };
enum class Layout { FileLayout, MemoryLayout };
enum class LayoutChoice { Auto, File, Memory };

const char* arch_name(Arch arch); // "x86" / "x64"

struct SectionHeader {
    std::string name;              // up to 8 bytes, NUL-stripped
    uint32_t virtual_address = 0;  // RVA
    uint32_t virtual_size = 0;
    uint32_t pointer_to_raw_data = 0;
    uint32_t size_of_raw_data = 0;
    uint32_t characteristics = 0;

    // Extent used for RVA matching; tolerates zero VirtualSize emitted by
    // some linkers.
    uint32_t virtual_extent() const {
        return virtual_size > size_of_raw_data ? virtual_size : size_of_raw_data;
    }
};

struct DataDirectoryEntry {
    uint32_t virtual_address = 0;
    uint32_t size = 0;
    bool present() const { return virtual_address != 0; }
};

inline constexpr size_t kDataDirectoryCount = 16;
inline constexpr size_t kTlsDirectoryIndex = 9;
inline constexpr size_t kImportDirectoryIndex = 1;
inline constexpr size_t kMaxSections = 96;
inline constexpr size_t kMaxImportDescriptors = 1024;

// Immutable after construction; safe to share across analysis threads.
struct PeImage {
    std::vector<uint8_t> raw;
    Layout layout = Layout::FileLayout;
    Arch arch = Arch::X86;
    uint64_t image_base = 0;
    uint32_t size_of_image = 0;
    uint32_t entry_point_rva = 0;
    std::vector<SectionHeader> sections;
    std::array<DataDirectoryEntry, kDataDirectoryCount> data_directories{};
    std::vector<std::string> warnings;

    ByteReader reader() const { return ByteReader(raw); }
};

enum class PeErrorCode { NotPe, Truncated, UnsupportedMagic };

class PeParseError : public std::runtime_error {
public:
    PeParseError(PeErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    PeErrorCode code() const { return code_; }

private:
    PeErrorCode code_;
};

struct ParseOptions {
    LayoutChoice layout = LayoutChoice::Auto;
    std::optional<uint64_t> image_base_override; // for ASLR-rebased dumps
};

PeImage parse_image(ByteSpan bytes, const ParseOptions& options = {});

enum class TranslateError { Unmapped, OutOfFile, OutOfImage };

template <typename T>
struct Translated {
    std::optional<T> value;
    TranslateError error = TranslateError::Unmapped;

    bool ok() const { return value.has_value(); }
    T operator*() const { return *value; }
};

// RVA -> file offset. MemoryLayout images translate identically; FileLayout
// goes through the section table. RVAs below the first section map to the
// header region at the same offset.
Translated<uint64_t> rva_to_offset(const PeImage& img, uint32_t rva);

// VA -> RVA via the image base.
Translated<uint32_t> va_to_rva(const PeImage& img, uint64_t va);

// Absent entries come back zeroed; index must be < 16.
DataDirectoryEntry data_directory(const PeImage& img, size_t index);

// IAT slot VA -> "dll!function" (or "dll!#ordinal").
using IatMap = std::map<uint64_t, std::string>;

struct IatParseResult {
    IatMap map;
    bool malformed = false;
    std::vector<std::string> warnings;
};

// Walks import descriptors / name tables / thunk arrays. Malformed tables
// yield a partial map plus the malformed flag; analysis never aborts here.
IatParseResult parse_imports(const PeImage& img);

} // namespace tlscheck
