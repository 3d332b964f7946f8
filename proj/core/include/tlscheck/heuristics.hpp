#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tlscheck/disasm.hpp"

namespace tlscheck {

enum class FindingCategory : uint8_t {
    NopSled,
    ControlFlowHijack,
    StackString,
    ApiHashing,
    DynamicMemWrite,
    AntiDebug,
    RegexMatch,
    YaraMatch,
};

const char* finding_category_name(FindingCategory c); // snake_case, for reports

struct Finding {
    FindingCategory category = FindingCategory::NopSled;
    std::string message;
    size_t anchor_index = 0; // instruction index; byte offset for YaraMatch
    uint64_t anchor_va = 0;

    bool operator==(const Finding&) const = default;
};

struct HeuristicConfig {
    size_t nop_sled_min_run = 3;
    size_t api_hash_window = 8;
    size_t stack_string_min_pushes = 2;
    size_t stack_string_min_movs = 3;
};

using InsnSpan = std::span<const Instruction>;

// Maximal runs of NOP-equivalent instructions (nop any encoding, xchg r,r,
// mov r,r with identical registers) of at least nop_sled_min_run.
std::vector<Finding> detect_nop_sled(InsnSpan insns, const HeuristicConfig& cfg = {});

// Register-based call/jmp.
std::vector<Finding> detect_control_flow_hijack(InsnSpan insns);

// Printable push runs, byte-wise frame stores with adjacent displacements,
// and xor-obfuscated bytes next to such a region.
std::vector<Finding> detect_stack_strings(InsnSpan insns, const HeuristicConfig& cfg = {});

// Two or more xor/rol/ror (minus self-zeroing xor) shortly before an
// indirect call.
std::vector<Finding> detect_api_hashing(InsnSpan insns, const HeuristicConfig& cfg = {});

// Stores through base+index combinations or non-frame bases with register
// sources; frame-relative stores stay quiet.
std::vector<Finding> detect_dynamic_mem_write(InsnSpan insns);

// int3 plus reason-code compares against the callback's second argument slot.
std::vector<Finding> detect_anti_debug(InsnSpan insns, Arch arch);

// Union of all six detectors ordered by anchor index, then category.
std::vector<Finding> scan(InsnSpan insns, Arch arch, const HeuristicConfig& cfg = {});

// Shared operand predicates (the rule/report layers reuse a few).
bool is_nop_equivalent(const Instruction& insn);
bool is_frame_register(Reg r);

} // namespace tlscheck
