#include "tlscheck/heuristics.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>

namespace tlscheck {

namespace {

std::string format_msg(const char* fmt, auto... args) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    return buf;
}

bool two_identical_registers(const Instruction& insn) {
    return insn.operands.size() == 2 &&
           insn.operands[0].kind == Operand::Kind::Register &&
           insn.operands[1].kind == Operand::Kind::Register &&
           insn.operands[0].reg == insn.operands[1].reg;
}

bool is_hash_arith(const Instruction& insn) {
    if (insn.op != Op::xor_ && insn.op != Op::rol && insn.op != Op::ror) return false;
    if (insn.op == Op::xor_ && two_identical_registers(insn)) return false; // register zeroing
    return true;
}

bool is_indirect_call(const Instruction& insn) {
    return insn.op == Op::call && insn.operands.size() == 1 &&
           (insn.operands[0].kind == Operand::Kind::Register ||
            insn.operands[0].kind == Operand::Kind::Memory);
}

bool writes_memory(const Instruction& insn) {
    if (insn.operands.empty() || insn.operands[0].kind != Operand::Kind::Memory) return false;
    switch (insn.op) {
    case Op::mov: case Op::add: case Op::adc: case Op::sub: case Op::sbb:
    case Op::and_: case Op::or_: case Op::xor_: case Op::xchg:
    case Op::inc: case Op::dec: case Op::not_: case Op::neg:
    case Op::rol: case Op::ror: case Op::rcl: case Op::rcr:
    case Op::shl: case Op::shr: case Op::sar: case Op::pop:
        return true;
    default:
        return false;
    }
}

struct PushInfo {
    bool qualifies = false;
    int printable_bytes = 0;
};

PushInfo printable_push(const Instruction& insn) {
    PushInfo info;
    if (insn.op != Op::push || insn.operands.size() != 1 ||
        insn.operands[0].kind != Operand::Kind::Immediate)
        return info;
    uint64_t v = insn.operands[0].value;
    info.qualifies = true;
    for (int i = 0; i < 8; ++i) {
        uint8_t b = uint8_t(v >> (8 * i));
        if (b == 0) continue;
        if (!is_printable_ascii(b)) {
            info.qualifies = false;
            return info;
        }
        ++info.printable_bytes;
    }
    return info;
}

struct ByteStore {
    Reg frame = Reg::none;
    int64_t disp = 0;
};

std::optional<ByteStore> printable_frame_byte_mov(const Instruction& insn) {
    if (insn.op != Op::mov || insn.operands.size() != 2) return std::nullopt;
    const Operand& dst = insn.operands[0];
    const Operand& src = insn.operands[1];
    if (dst.kind != Operand::Kind::Memory || src.kind != Operand::Kind::Immediate) return std::nullopt;
    if (dst.mem.size != 1 || dst.mem.index != Reg::none || dst.mem.segment != Reg::none) return std::nullopt;
    if (!is_frame_register(dst.mem.base)) return std::nullopt;
    uint8_t b = uint8_t(src.value);
    if (!is_printable_ascii(b)) return std::nullopt;
    return ByteStore{dst.mem.base, dst.mem.disp};
}

bool frame_byte_xor(const Instruction& insn, ByteStore& out) {
    if (insn.op != Op::xor_ || insn.operands.size() != 2) return false;
    const Operand& dst = insn.operands[0];
    if (dst.kind != Operand::Kind::Memory || insn.operands[1].kind != Operand::Kind::Immediate)
        return false;
    if (dst.mem.size != 1 || dst.mem.index != Reg::none) return false;
    if (!is_frame_register(dst.mem.base)) return false;
    out = {dst.mem.base, dst.mem.disp};
    return true;
}

} // namespace

const char* finding_category_name(FindingCategory c) {
    switch (c) {
    case FindingCategory::NopSled: return "nop_sled";
    case FindingCategory::ControlFlowHijack: return "control_flow_hijack";
    case FindingCategory::StackString: return "stack_string";
    case FindingCategory::ApiHashing: return "api_hashing";
    case FindingCategory::DynamicMemWrite: return "dynamic_mem_write";
    case FindingCategory::AntiDebug: return "anti_debug";
    case FindingCategory::RegexMatch: return "regex_match";
    case FindingCategory::YaraMatch: return "yara_match";
    }
    return "unknown";
}

bool is_frame_register(Reg r) {
    return r == Reg::ebp || r == Reg::esp || r == Reg::rbp || r == Reg::rsp;
}

bool is_nop_equivalent(const Instruction& insn) {
    if (insn.op == Op::nop) return true;
    if ((insn.op == Op::xchg || insn.op == Op::mov) && two_identical_registers(insn)) return true;
    return false;
}

std::vector<Finding> detect_nop_sled(InsnSpan insns, const HeuristicConfig& cfg) {
    std::vector<Finding> findings;
    size_t i = 0;
    while (i < insns.size()) {
        if (!is_nop_equivalent(insns[i])) { ++i; continue; }
        size_t j = i;
        size_t literal = 0;
        while (j < insns.size() && is_nop_equivalent(insns[j])) {
            if (insns[j].op == Op::nop) ++literal;
            ++j;
        }
        size_t run = j - i;
        if (run >= cfg.nop_sled_min_run) {
            bool homogeneous = literal == run;
            size_t n = homogeneous ? literal : run;
            Finding f;
            f.category = FindingCategory::NopSled;
            f.anchor_index = i;
            f.anchor_va = insns[i].address;
            f.message = format_msg("NOP Sled Detected: %zu consecutive NOPs at offset %zu%s",
                                   n, i, homogeneous ? "" : " (incl. semantic NOPs)");
            findings.push_back(std::move(f));
        }
        i = j;
    }
    return findings;
}

std::vector<Finding> detect_control_flow_hijack(InsnSpan insns) {
    std::vector<Finding> findings;
    for (size_t i = 0; i < insns.size(); ++i) {
        const Instruction& insn = insns[i];
        if (insn.op != Op::call && insn.op != Op::jmp) continue;
        if (insn.operands.size() != 1 || insn.operands[0].kind != Operand::Kind::Register) continue;
        Finding f;
        f.category = FindingCategory::ControlFlowHijack;
        f.anchor_index = i;
        f.anchor_va = insn.address;
        f.message = "Suspicious Control Flow: " + insn.text;
        findings.push_back(std::move(f));
    }
    return findings;
}

std::vector<Finding> detect_stack_strings(InsnSpan insns, const HeuristicConfig& cfg) {
    std::vector<Finding> findings;

    // (a) consecutive printable pushes
    size_t i = 0;
    while (i < insns.size()) {
        PushInfo info = printable_push(insns[i]);
        if (!info.qualifies) { ++i; continue; }
        size_t j = i;
        int best = 0;
        while (j < insns.size()) {
            PushInfo pj = printable_push(insns[j]);
            if (!pj.qualifies) break;
            best = std::max(best, pj.printable_bytes);
            ++j;
        }
        size_t run = j - i;
        if (run >= cfg.stack_string_min_pushes && best >= 2) {
            Finding f;
            f.category = FindingCategory::StackString;
            f.anchor_index = i;
            f.anchor_va = insns[i].address;
            f.message = format_msg("Stack String Construction: %zu consecutive printable pushes at offset %zu",
                                   run, i);
            findings.push_back(std::move(f));
        }
        i = j;
    }

    // (b) byte-wise builds: maximal windows of frame byte stores whose
    // displacements step by exactly +1 or -1.
    struct Region { size_t lo, hi; Reg frame; int64_t dmin, dmax; };
    std::vector<Region> regions;
    auto window_ok = [&](size_t lo, size_t hi) {
        auto first = printable_frame_byte_mov(insns[lo]);
        if (!first) return false;
        int64_t step = 0;
        int64_t prev = first->disp;
        for (size_t k = lo + 1; k <= hi; ++k) {
            auto cur = printable_frame_byte_mov(insns[k]);
            if (!cur || cur->frame != first->frame) return false;
            int64_t d = cur->disp - prev;
            if (d != 1 && d != -1) return false;
            if (step == 0) step = d;
            else if (d != step) return false;
            prev = cur->disp;
        }
        return true;
    };
    for (size_t lo = 0; lo < insns.size(); ++lo) {
        for (size_t hi = lo + cfg.stack_string_min_movs - 1; hi < insns.size(); ++hi) {
            if (!window_ok(lo, hi)) continue;
            bool left = lo > 0 && window_ok(lo - 1, hi);
            bool right = hi + 1 < insns.size() && window_ok(lo, hi + 1);
            if (left || right) continue; // not maximal
            auto first = printable_frame_byte_mov(insns[lo]);
            int64_t dmin = first->disp, dmax = first->disp;
            for (size_t k = lo; k <= hi; ++k) {
                auto bs = printable_frame_byte_mov(insns[k]);
                dmin = std::min(dmin, bs->disp);
                dmax = std::max(dmax, bs->disp);
            }
            regions.push_back({lo, hi, first->frame, dmin, dmax});
            Finding f;
            f.category = FindingCategory::StackString;
            f.anchor_index = lo;
            f.anchor_va = insns[lo].address;
            f.message = format_msg("Stack String Construction: byte-wise build over [%s] at offset %zu",
                                   reg_name(first->frame), lo);
            findings.push_back(std::move(f));
        }
    }

    // (c) xor-obfuscated bytes adjacent to a byte-wise region
    for (size_t k = 0; k < insns.size(); ++k) {
        ByteStore bs;
        if (!frame_byte_xor(insns[k], bs)) continue;
        bool adjacent = false;
        for (const Region& r : regions) {
            if (r.frame == bs.frame && bs.disp >= r.dmin - 8 && bs.disp <= r.dmax + 8) {
                adjacent = true;
                break;
            }
        }
        if (!adjacent) continue;
        Finding f;
        f.category = FindingCategory::StackString;
        f.anchor_index = k;
        f.anchor_va = insns[k].address;
        f.message = format_msg("Stack String Construction: xor-obfuscated stack bytes at offset %zu", k);
        findings.push_back(std::move(f));
    }

    std::stable_sort(findings.begin(), findings.end(),
                     [](const Finding& a, const Finding& b) { return a.anchor_index < b.anchor_index; });
    return findings;
}

std::vector<Finding> detect_api_hashing(InsnSpan insns, const HeuristicConfig& cfg) {
    std::vector<Finding> findings;
    for (size_t i = 0; i < insns.size(); ++i) {
        if (!is_indirect_call(insns[i])) continue;
        size_t lo = i > cfg.api_hash_window ? i - cfg.api_hash_window : 0;
        size_t n = 0;
        for (size_t k = lo; k < i; ++k)
            if (is_hash_arith(insns[k])) ++n;
        if (n < 2) continue;
        Finding f;
        f.category = FindingCategory::ApiHashing;
        f.anchor_index = i;
        f.anchor_va = insns[i].address;
        f.message = format_msg("API Hashing Pattern: %zu hash ops before indirect call at offset %zu", n, i);
        findings.push_back(std::move(f));
    }
    return findings;
}

std::vector<Finding> detect_dynamic_mem_write(InsnSpan insns) {
    std::vector<Finding> findings;
    for (size_t i = 0; i < insns.size(); ++i) {
        const Instruction& insn = insns[i];
        if (!writes_memory(insn)) continue;
        const MemRef& m = insn.operands[0].mem;
        bool base_index = m.base != Reg::none && m.index != Reg::none;
        bool non_frame_reg_store =
            m.base != Reg::none && m.base != Reg::rip && !is_frame_register(m.base) &&
            m.index == Reg::none &&
            insn.operands.size() >= 2 && insn.operands[1].kind == Operand::Kind::Register;
        if (!base_index && !non_frame_reg_store) continue;
        Finding f;
        f.category = FindingCategory::DynamicMemWrite;
        f.anchor_index = i;
        f.anchor_va = insn.address;
        f.message = "Dynamic Memory Write: " + insn.text;
        findings.push_back(std::move(f));
    }
    return findings;
}

std::vector<Finding> detect_anti_debug(InsnSpan insns, Arch arch) {
    std::vector<Finding> findings;
    for (size_t i = 0; i < insns.size(); ++i) {
        const Instruction& insn = insns[i];
        if (insn.op == Op::int3) {
            Finding f;
            f.category = FindingCategory::AntiDebug;
            f.anchor_index = i;
            f.anchor_va = insn.address;
            f.message = format_msg(
                "Anti-Debugging Detected: int3 (software breakpoint) usage in anti-debugging routine at 0x%llx",
                static_cast<unsigned long long>(insn.address));
            findings.push_back(std::move(f));
            continue;
        }
        if (insn.op != Op::cmp || insn.operands.size() != 2) continue;
        const Operand& dst = insn.operands[0];
        const Operand& src = insn.operands[1];
        if (dst.kind != Operand::Kind::Memory || src.kind != Operand::Kind::Immediate) continue;
        if (dst.mem.index != Reg::none) continue;
        if (src.value < 1 || src.value > 3) continue;
        // second callback argument: the attach/detach reason code
        bool slot = arch == Arch::X64
                        ? ((dst.mem.base == Reg::rbp || dst.mem.base == Reg::rsp) && dst.mem.disp == 0x18)
                        : (dst.mem.base == Reg::ebp && dst.mem.disp == 0xc);
        if (!slot) continue;
        Finding f;
        f.category = FindingCategory::AntiDebug;
        f.anchor_index = i;
        f.anchor_va = insn.address;
        f.message = format_msg(
            "Anti-Debugging Detected: TLS callback anti-debugging check (reason code) at 0x%llx",
            static_cast<unsigned long long>(insn.address));
        findings.push_back(std::move(f));
    }
    return findings;
}

std::vector<Finding> scan(InsnSpan insns, Arch arch, const HeuristicConfig& cfg) {
    std::vector<Finding> all;
    auto append = [&](std::vector<Finding> v) {
        all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    };
    append(detect_nop_sled(insns, cfg));
    append(detect_control_flow_hijack(insns));
    append(detect_stack_strings(insns, cfg));
    append(detect_api_hashing(insns, cfg));
    append(detect_dynamic_mem_write(insns));
    append(detect_anti_debug(insns, arch));
    std::stable_sort(all.begin(), all.end(), [](const Finding& a, const Finding& b) {
        if (a.anchor_index != b.anchor_index) return a.anchor_index < b.anchor_index;
        return a.category < b.category;
    });
    return all;
}

} // namespace tlscheck
