#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tlscheck/resolver.hpp"
#include "tlscheck/tls.hpp"

namespace tlscheck {

// Process context normally supplied by a sidecar metadata file; a file-based
// analyzer cannot recover it from the image itself.
struct TargetMeta {
    std::optional<int64_t> pid;
    std::optional<int64_t> ppid;
    std::string process_name;
    std::string path;
    std::optional<uint64_t> offset_v;
};

struct AnalysisReport {
    TargetMeta meta;
    Arch arch = Arch::X86;
    uint32_t tls_rva = 0;
    TlsStatus status = TlsStatus::NoTlsDirectory;
    std::vector<CallbackRecord> callbacks;
    std::vector<CallTargetAnalysis> recursive;
    std::vector<std::string> warnings;
};

const char* tls_status_name(TlsStatus status);

// Plain-text report: header table, per-callback hex dump + disassembly,
// recursive call-target blocks, then the suspicious-findings section.
std::string render_text(const AnalysisReport& report);

// Stable machine-readable document; key order fixed, hex values lowercase
// 0x-prefixed strings.
std::string render_json(const AnalysisReport& report);

} // namespace tlscheck
