#include "tlscheck/resolver.hpp"

#include <set>

namespace tlscheck {

namespace {

std::optional<uint64_t> memory_slot_va(const Instruction& insn, const Operand& op) {
    if (op.kind != Operand::Kind::Memory) return std::nullopt;
    const MemRef& m = op.mem;
    if (m.base == Reg::rip && m.index == Reg::none)
        return insn.address + insn.length + uint64_t(m.disp);
    if (m.absolute) return uint64_t(m.disp);
    return std::nullopt;
}

std::string unknown_label(uint32_t rva) { return "Unknown_API_0x" + to_hex(rva); }

// A thunk is a lone jmp through an IAT slot; direct calls that land on one
// resolve to the imported name behind it.
std::optional<std::string> resolve_thunk(const PeImage& img, uint64_t target_va, const IatMap& iat) {
    auto rva = va_to_rva(img, target_va);
    if (!rva.ok()) return std::nullopt;
    auto off = rva_to_offset(img, *rva);
    if (!off.ok()) return std::nullopt;
    ByteReader r(img.raw);
    auto bytes = r.bytes(*off, 8);
    auto insns = decode(bytes, target_va, img.arch);
    if (insns.empty() || insns[0].op != Op::jmp || insns[0].operands.size() != 1) return std::nullopt;
    auto slot = memory_slot_va(insns[0], insns[0].operands[0]);
    if (!slot) return std::nullopt;
    auto it = iat.find(*slot);
    if (it == iat.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> label_for(const PeImage& img, const Instruction& insn, const IatMap& iat) {
    if (insn.op != Op::call && insn.op != Op::jmp) return std::nullopt;
    if (insn.operands.size() != 1) return std::nullopt;
    const Operand& op = insn.operands[0];

    if (auto slot = memory_slot_va(insn, op)) {
        if (auto it = iat.find(*slot); it != iat.end()) return it->second;
        auto rva = va_to_rva(img, *slot);
        if (rva.ok()) return unknown_label(*rva);
        return std::nullopt;
    }
    if (op.kind == Operand::Kind::RelativeTarget) {
        auto rva = va_to_rva(img, op.target_va);
        if (!rva.ok()) return std::nullopt;
        if (auto through_thunk = resolve_thunk(img, op.target_va, iat)) return through_thunk;
        return unknown_label(*rva);
    }
    return std::nullopt;
}

struct Follower {
    const PeImage& img;
    const IatMap& iat;
    const FollowOptions& opts;
    std::vector<std::string>* warnings;
    std::set<uint64_t> visited;
    std::vector<CallTargetAnalysis> out;

    void follow_from(InsnSpan insns, size_t depth) {
        if (depth > opts.depth_limit) return;
        for (const Instruction& insn : insns) {
            if (insn.op != Op::call) continue;
            auto target = resolve_rel_target(insn);
            if (!target) continue;
            auto rva = va_to_rva(img, *target);
            if (!rva.ok()) continue;
            if (resolve_thunk(img, *target, iat)) continue; // IAT-resolved
            if (!visited.insert(*target).second) continue;

            CallTargetAnalysis analysis;
            analysis.caller_va = insn.address;
            analysis.target_va = *target;
            analysis.depth = depth;

            auto off = rva_to_offset(img, *rva);
            if (!off.ok()) {
                analysis.unreadable = true;
                if (warnings)
                    warnings->push_back("call target " + hex_va(*target) + " is unreadable");
                out.push_back(std::move(analysis));
                continue;
            }
            ByteReader r(img.raw);
            analysis.raw_bytes = r.bytes(*off, opts.budget);
            analysis.instructions = decode(analysis.raw_bytes, *target, img.arch);
            analysis.annotations = annotate(img, analysis.instructions, iat);
            std::vector<Instruction> body = analysis.instructions;
            out.push_back(std::move(analysis));
            follow_from(body, depth + 1);
        }
    }
};

} // namespace

std::vector<std::pair<size_t, std::string>> annotate(const PeImage& img, InsnSpan insns,
                                                     const IatMap& iat) {
    std::vector<std::pair<size_t, std::string>> labels;
    for (size_t i = 0; i < insns.size(); ++i) {
        if (auto label = label_for(img, insns[i], iat)) labels.emplace_back(i, *label);
    }
    return labels;
}

std::vector<CallTargetAnalysis> follow_call_targets(const PeImage& img, const CallbackRecord& cb,
                                                    const IatMap& iat, const FollowOptions& opts,
                                                    std::vector<std::string>* warnings) {
    Follower f{img, iat, opts, warnings, {}, {}};
    if (opts.depth_limit == 0) return {};
    f.follow_from(cb.instructions, 1);
    return std::move(f.out);
}

} // namespace tlscheck
