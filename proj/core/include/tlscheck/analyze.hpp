#pragma once

#include <optional>
#include <regex>

#include "tlscheck/report.hpp"
#include "tlscheck/rules.hpp"

namespace tlscheck {

struct AnalyzeOptions {
    LayoutChoice layout = LayoutChoice::Auto;
    std::optional<uint64_t> image_base_override;
    size_t disasm_bytes = kDefaultDisasmBytes;
    size_t depth = 1;
    size_t callback_cap = kDefaultCallbackCap;
    bool scan_suspicious = false;
    std::optional<std::regex> regex;
    const RuleSet* rules = nullptr;
    HeuristicConfig heuristics{};
};

// Full pipeline over one image: parse, imports, TLS extraction, per-callback
// disassembly/annotation/scanning, recursive call-target analysis.
// Throws PeParseError when the input is not a usable PE.
AnalysisReport analyze_image(ByteSpan bytes, const AnalyzeOptions& options, TargetMeta meta = {});

} // namespace tlscheck
