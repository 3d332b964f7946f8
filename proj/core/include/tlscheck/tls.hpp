#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tlscheck/disasm.hpp"
#include "tlscheck/heuristics.hpp"
#include "tlscheck/pe.hpp"

namespace tlscheck {

enum class TlsBitness { Bits32, Bits64 };

struct TlsDirectoryInfo {
    uint32_t directory_rva = 0;
    uint64_t start_address_of_raw_data = 0; // VA
    uint64_t end_address_of_raw_data = 0;   // VA
    uint64_t address_of_index = 0;          // VA
    uint64_t address_of_callbacks = 0;      // VA
    uint32_t size_of_zero_fill = 0;
    uint32_t characteristics = 0;
    TlsBitness bitness = TlsBitness::Bits32;
};

struct CallbackRecord {
    uint64_t va = 0;
    uint32_t rva = 0;
    uint64_t file_offset = 0;
    std::vector<uint8_t> raw_bytes;
    bool truncated = false; // fewer bytes than the requested budget
    std::vector<Instruction> instructions;
    std::vector<std::pair<size_t, std::string>> annotations; // instruction index -> label
    std::vector<Finding> findings;
};

enum class TlsStatus { NoTlsDirectory, EmptyCallbackTable, CallbacksFound };

struct TlsExtractionResult {
    TlsStatus status = TlsStatus::NoTlsDirectory;
    std::optional<TlsDirectoryInfo> directory;
    std::vector<CallbackRecord> callbacks;
    std::vector<uint64_t> unresolved_vas; // pointers that did not translate
    std::vector<std::string> warnings;
};

inline constexpr size_t kDefaultCallbackCap = 64;
inline constexpr size_t kDefaultDisasmBytes = 64;

// Decodes the TLS directory behind data directory entry 9. Unreadable
// directories degrade to nullopt plus a warning.
std::optional<TlsDirectoryInfo> locate_tls_directory(const PeImage& img,
                                                     std::vector<std::string>* warnings = nullptr);

// Walks the callback pointer array until a null pointer, a read failure, or
// the cap. Pointers that fail VA translation are recorded, not decoded.
TlsExtractionResult enumerate_callbacks(const PeImage& img, const TlsDirectoryInfo& dir,
                                        size_t max_callbacks = kDefaultCallbackCap);

// Up to `budget` bytes from the callback's file offset, clamped at image end.
std::vector<uint8_t> read_callback_bytes(const PeImage& img, CallbackRecord& cb, size_t budget);

} // namespace tlscheck
