#include "tlscheck/report.hpp"

#include <json.hpp>

namespace tlscheck {

namespace {

constexpr const char* kSeparator = "-----\n";
constexpr const char* kEmptyTableMessage =
    "The process has a non-empty TLS callback table, but no TLS callback procedures "
    "could be located within the process.";

std::string opt_int(const std::optional<int64_t>& v) {
    return v ? std::to_string(*v) : "-";
}

std::string opt_hex(const std::optional<uint64_t>& v) {
    return v ? hex_va(*v) : "-";
}

void append_disassembly(std::string& out, const std::vector<Instruction>& insns,
                        const std::vector<std::pair<size_t, std::string>>& annotations) {
    out += "Disassembly:\n";
    for (size_t i = 0; i < insns.size(); ++i) {
        out += hex_va(insns[i].address) + ": " + insns[i].text;
        for (const auto& [idx, label] : annotations) {
            if (idx == i) {
                out += " [API: " + label + "]";
                break;
            }
        }
        out += '\n';
    }
}

nlohmann::ordered_json instructions_json(const std::vector<Instruction>& insns,
                                         const std::vector<std::pair<size_t, std::string>>& annotations) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (size_t i = 0; i < insns.size(); ++i) {
        nlohmann::ordered_json j;
        j["va"] = hex_va(insns[i].address);
        j["text"] = insns[i].text;
        for (const auto& [idx, label] : annotations) {
            if (idx == i) {
                j["api_label"] = label;
                break;
            }
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

nlohmann::ordered_json findings_json(const std::vector<Finding>& findings) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const Finding& f : findings) {
        nlohmann::ordered_json j;
        j["category"] = finding_category_name(f.category);
        j["message"] = f.message;
        j["va"] = hex_va(f.anchor_va);
        arr.push_back(std::move(j));
    }
    return arr;
}

} // namespace

const char* tls_status_name(TlsStatus status) {
    switch (status) {
    case TlsStatus::NoTlsDirectory: return "no_tls_directory";
    case TlsStatus::EmptyCallbackTable: return "empty_callback_table";
    case TlsStatus::CallbacksFound: return "callbacks_found";
    }
    return "unknown";
}

std::string render_text(const AnalysisReport& report) {
    std::string out;
    out += "PID PPID Process Name Offset(V) TLS RVA(V) Architecture Path\n";
    out += kSeparator;
    out += opt_int(report.meta.pid) + " " + opt_int(report.meta.ppid) + " " +
           report.meta.process_name + " " + opt_hex(report.meta.offset_v) + " " +
           hex_va(report.tls_rva) + " " + arch_name(report.arch) + " " + report.meta.path + "\n";

    if (report.status == TlsStatus::NoTlsDirectory) {
        out += kSeparator;
        out += "No TLS directory present.\n";
    } else if (report.status == TlsStatus::EmptyCallbackTable) {
        out += kSeparator;
        out += kEmptyTableMessage;
        out += '\n';
    }

    for (const CallbackRecord& cb : report.callbacks) {
        out += '\n';
        out += kSeparator;
        out += "TLS-Callback Found in Process: " + report.meta.process_name +
               " (PID: " + opt_int(report.meta.pid) + ")\n";
        out += "Address range: " + hex_va(cb.va) + " - " + hex_va(cb.va + cb.raw_bytes.size()) + "\n";
        out += kSeparator;
        out += hex_dump(cb.raw_bytes);
        append_disassembly(out, cb.instructions, cb.annotations);
    }

    for (const CallTargetAnalysis& rec : report.recursive) {
        out += '\n';
        out += kSeparator;
        out += "Disassembling call target at address: " + hex_va(rec.target_va) +
               " For Process: " + report.meta.process_name +
               " (PID: " + opt_int(report.meta.pid) + ")\n";
        if (rec.unreadable) {
            out += "Call target unreadable.\n";
            continue;
        }
        out += "Address range: " + hex_va(rec.target_va) + " - " +
               hex_va(rec.target_va + rec.raw_bytes.size()) + "\n";
        out += kSeparator;
        out += hex_dump(rec.raw_bytes);
        append_disassembly(out, rec.instructions, rec.annotations);
    }

    std::vector<const Finding*> all;
    for (const CallbackRecord& cb : report.callbacks)
        for (const Finding& f : cb.findings) all.push_back(&f);
    for (const CallTargetAnalysis& rec : report.recursive)
        for (const Finding& f : rec.findings) all.push_back(&f);
    if (!all.empty()) {
        out += '\n';
        out += kSeparator;
        out += "[*] Potentially Suspicious Instruction(s) Identified:\n";
        out += kSeparator;
        for (const Finding* f : all) out += "[SUSPICIOUS]: " + f->message + "\n";
    }

    for (const std::string& w : report.warnings) out += "[WARNING]: " + w + "\n";
    return out;
}

std::string render_json(const AnalysisReport& report) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json meta;
    meta["pid"] = report.meta.pid ? nlohmann::ordered_json(*report.meta.pid) : nullptr;
    meta["ppid"] = report.meta.ppid ? nlohmann::ordered_json(*report.meta.ppid) : nullptr;
    meta["process_name"] = report.meta.process_name;
    meta["path"] = report.meta.path;
    meta["offset_v"] = report.meta.offset_v ? nlohmann::ordered_json(hex_va(*report.meta.offset_v)) : nullptr;
    doc["meta"] = std::move(meta);
    doc["arch"] = arch_name(report.arch);
    doc["tls_rva"] = hex_va(report.tls_rva);
    doc["status"] = tls_status_name(report.status);

    nlohmann::ordered_json callbacks = nlohmann::ordered_json::array();
    for (const CallbackRecord& cb : report.callbacks) {
        nlohmann::ordered_json j;
        j["va"] = hex_va(cb.va);
        j["rva"] = hex_va(cb.rva);
        j["bytes_hex"] = bytes_to_hex(cb.raw_bytes);
        j["instructions"] = instructions_json(cb.instructions, cb.annotations);
        j["findings"] = findings_json(cb.findings);
        callbacks.push_back(std::move(j));
    }
    doc["callbacks"] = std::move(callbacks);

    nlohmann::ordered_json recursive = nlohmann::ordered_json::array();
    for (const CallTargetAnalysis& rec : report.recursive) {
        nlohmann::ordered_json j;
        j["caller_va"] = hex_va(rec.caller_va);
        j["target_va"] = hex_va(rec.target_va);
        j["depth"] = rec.depth;
        j["bytes_hex"] = bytes_to_hex(rec.raw_bytes);
        j["instructions"] = instructions_json(rec.instructions, rec.annotations);
        j["findings"] = findings_json(rec.findings);
        recursive.push_back(std::move(j));
    }
    doc["recursive"] = std::move(recursive);
    doc["warnings"] = report.warnings;

    return doc.dump(2) + "\n";
}

} // namespace tlscheck
