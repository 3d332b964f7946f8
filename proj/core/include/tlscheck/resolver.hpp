#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tlscheck/tls.hpp"

namespace tlscheck {

struct CallTargetAnalysis {
    uint64_t caller_va = 0;
    uint64_t target_va = 0;
    size_t depth = 1;
    std::vector<uint8_t> raw_bytes;
    std::vector<Instruction> instructions;
    std::vector<std::pair<size_t, std::string>> annotations;
    std::vector<Finding> findings;
    bool unreadable = false;
};

// API labels for call/jmp instructions. Indirect calls through absolute or
// RIP-relative slots resolve via the IAT; direct relative targets inside the
// image resolve through single-jmp thunks or get an Unknown_API_0x{rva}
// label. Register-based targets stay unlabeled.
std::vector<std::pair<size_t, std::string>> annotate(const PeImage& img, InsnSpan insns,
                                                     const IatMap& iat);

struct FollowOptions {
    size_t depth_limit = 1;
    size_t budget = kDefaultDisasmBytes;
};

// Recursively disassembles direct in-image call targets that did not resolve
// to an imported API. A visited set keyed on target VA keeps chains acyclic;
// traversal is depth-first in instruction order.
std::vector<CallTargetAnalysis> follow_call_targets(const PeImage& img, const CallbackRecord& cb,
                                                    const IatMap& iat, const FollowOptions& opts,
                                                    std::vector<std::string>* warnings = nullptr);

} // namespace tlscheck
