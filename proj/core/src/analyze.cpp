#include "tlscheck/analyze.hpp"

namespace tlscheck {

namespace {

void apply_findings(std::vector<Finding>& out, InsnSpan insns, ByteSpan window, uint64_t base_va,
                    Arch arch, const AnalyzeOptions& options) {
    if (options.scan_suspicious) {
        auto found = scan(insns, arch, options.heuristics);
        out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
    if (options.regex) {
        auto found = match_regex(insns, *options.regex);
        out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
    if (options.rules) {
        auto found = match_rules(window, *options.rules, base_va);
        out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
}

} // namespace

AnalysisReport analyze_image(ByteSpan bytes, const AnalyzeOptions& options, TargetMeta meta) {
    ParseOptions parse_options;
    parse_options.layout = options.layout;
    parse_options.image_base_override = options.image_base_override;
    PeImage img = parse_image(bytes, parse_options);

    AnalysisReport report;
    report.meta = std::move(meta);
    report.arch = img.arch;
    report.warnings = img.warnings;
    report.tls_rva = data_directory(img, kTlsDirectoryIndex).virtual_address;

    IatParseResult imports = parse_imports(img);
    report.warnings.insert(report.warnings.end(), imports.warnings.begin(), imports.warnings.end());

    auto dir = locate_tls_directory(img, &report.warnings);
    if (!dir) {
        report.status = TlsStatus::NoTlsDirectory;
        return report;
    }

    TlsExtractionResult extraction = enumerate_callbacks(img, *dir, options.callback_cap);
    report.status = extraction.status;
    report.warnings.insert(report.warnings.end(), extraction.warnings.begin(), extraction.warnings.end());
    for (uint64_t va : extraction.unresolved_vas)
        report.warnings.push_back("callback pointer " + hex_va(va) + " does not resolve into the image");

    FollowOptions follow;
    follow.depth_limit = options.depth;
    follow.budget = options.disasm_bytes;

    for (CallbackRecord& cb : extraction.callbacks) {
        cb.raw_bytes = read_callback_bytes(img, cb, options.disasm_bytes);
        if (cb.truncated)
            report.warnings.push_back("callback at " + hex_va(cb.va) + " truncated to " +
                                      std::to_string(cb.raw_bytes.size()) + " bytes");
        cb.instructions = decode(cb.raw_bytes, cb.va, img.arch);
        cb.annotations = annotate(img, cb.instructions, imports.map);
        apply_findings(cb.findings, cb.instructions, cb.raw_bytes, cb.va, img.arch, options);

        auto targets = follow_call_targets(img, cb, imports.map, follow, &report.warnings);
        for (CallTargetAnalysis& rec : targets) {
            apply_findings(rec.findings, rec.instructions, rec.raw_bytes, rec.target_va, img.arch, options);
            report.recursive.push_back(std::move(rec));
        }
        report.callbacks.push_back(std::move(cb));
    }
    return report;
}

} // namespace tlscheck
