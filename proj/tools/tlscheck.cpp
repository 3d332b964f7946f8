// tlscheck: TLS callback extraction, disassembly, and heuristic scanning for
// PE executables and dumped process images.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tlscheck/analyze.hpp"
#include "tlscheck/forge.hpp"

namespace {

using tlscheck::Arch;
using tlscheck::Layout;
using tlscheck::LayoutChoice;

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

uint64_t parse_u64(const std::string& s) {
    return std::stoull(s, nullptr, 0); // accepts 0x-prefixed and decimal
}

// Sidecar metadata: key=value lines (pid, ppid, name, path, offset_v).
tlscheck::TargetMeta load_meta(const std::string& path) {
    tlscheck::TargetMeta meta;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metadata file " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "pid") meta.pid = std::stoll(value);
        else if (key == "ppid") meta.ppid = std::stoll(value);
        else if (key == "name") meta.process_name = value;
        else if (key == "path") meta.path = value;
        else if (key == "offset_v") meta.offset_v = parse_u64(value);
    }
    return meta;
}

uint64_t json_u64(const nlohmann::json& j) {
    if (j.is_string()) return parse_u64(j.get<std::string>());
    return j.get<uint64_t>();
}

std::vector<uint8_t> hex_to_bytes(const std::string& hex) {
    std::vector<uint8_t> out;
    std::string clean;
    for (char c : hex)
        if (!std::isspace(static_cast<unsigned char>(c))) clean.push_back(c);
    if (clean.size() % 2) throw std::runtime_error("odd-length hex string");
    for (size_t i = 0; i < clean.size(); i += 2)
        out.push_back(uint8_t(std::stoul(clean.substr(i, 2), nullptr, 16)));
    return out;
}

tlscheck::forge::ForgeSpec spec_from_json(const nlohmann::json& j) {
    tlscheck::forge::ForgeSpec spec;
    if (j.contains("arch")) spec.arch = j["arch"] == "x64" ? Arch::X64 : Arch::X86;
    if (j.contains("layout")) spec.layout = j["layout"] == "memory" ? Layout::MemoryLayout : Layout::FileLayout;
    if (j.contains("image_base")) spec.image_base = json_u64(j["image_base"]);
    if (j.contains("entry_point_rva")) spec.entry_point_rva = uint32_t(json_u64(j["entry_point_rva"]));
    if (j.contains("memory_disk_raw_pointers")) spec.memory_disk_raw_pointers = j["memory_disk_raw_pointers"];
    if (j.contains("import_table_rva")) spec.import_table_rva = uint32_t(json_u64(j["import_table_rva"]));
    for (const auto& s : j.value("sections", nlohmann::json::array())) {
        tlscheck::forge::ForgeSection sec;
        sec.name = s.value("name", std::string{});
        sec.rva = uint32_t(json_u64(s.at("rva")));
        if (s.contains("virtual_size")) sec.virtual_size = uint32_t(json_u64(s["virtual_size"]));
        if (s.contains("raw_size")) sec.raw_size = uint32_t(json_u64(s["raw_size"]));
        if (s.contains("content_hex")) sec.content = hex_to_bytes(s["content_hex"]);
        if (s.contains("characteristics")) sec.characteristics = uint32_t(json_u64(s["characteristics"]));
        spec.sections.push_back(std::move(sec));
    }
    if (j.contains("tls")) {
        const auto& t = j["tls"];
        tlscheck::forge::ForgeTls tls;
        for (const auto& rva : t.value("callback_rvas", nlohmann::json::array()))
            tls.callback_rvas.push_back(uint32_t(json_u64(rva)));
        tls.include_terminator = t.value("include_terminator", true);
        tls.store_as_rva_bug = t.value("store_as_rva_bug", false);
        if (t.contains("directory_rva")) tls.directory_rva = uint32_t(json_u64(t["directory_rva"]));
        if (t.contains("callbacks_array_rva")) tls.callbacks_array_rva = uint32_t(json_u64(t["callbacks_array_rva"]));
        spec.tls = std::move(tls);
    }
    for (const auto& imp : j.value("imports", nlohmann::json::array())) {
        tlscheck::forge::ForgeImport fi;
        fi.dll = imp.at("dll");
        fi.function = imp.at("function");
        fi.iat_slot_rva = uint32_t(json_u64(imp.at("iat_slot_rva")));
        spec.imports.push_back(std::move(fi));
    }
    if (j.contains("callback_code")) {
        for (const auto& [rva, hex] : j["callback_code"].items())
            spec.callback_code[uint32_t(parse_u64(rva))] = hex_to_bytes(hex.get<std::string>());
    }
    return spec;
}

int run_forge(const std::string& spec_path, const std::string& out_path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(spec_path));
    auto bytes = tlscheck::forge::forge(spec_from_json(j));
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    std::cerr << "wrote " << bytes.size() << " bytes to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TLS callback analyzer for PE executables and process dumps"};
    app.set_help_flag("-h,--help", "show this help message and exit");

    std::vector<std::string> inputs;
    std::vector<int64_t> pids;
    size_t disasm_bytes = tlscheck::kDefaultDisasmBytes;
    bool scan_suspicious = false;
    std::string regex_pattern;
    std::string yara_path;
    std::string layout_choice = "auto";
    std::string image_base;
    size_t depth = 1;
    std::string json_path;
    std::vector<std::string> meta_paths;

    app.add_option("inputs", inputs, "PE files or dumped process images");
    app.add_option("--pid", pids, "Process IDs to include (all other processes are excluded)");
    app.add_option("--disasm-bytes", disasm_bytes, "Bytes to disassemble (Default: 64)");
    app.add_flag("--scan-suspicious", scan_suspicious,
                 "Displays suspicious TLS Callback instruction(s) along with the disassembly");
    app.add_option("--regex", regex_pattern, "Custom regex pattern to match against disassembled instructions");
    app.add_option("--yara-file", yara_path, "Path to custom YARA rule file");
    app.add_option("--layout", layout_choice, "Image layout: file, memory, or auto (Default: auto)")
        ->check(CLI::IsMember({"file", "memory", "auto"}));
    app.add_option("--image-base", image_base, "Override the Optional Header image base (hex)");
    app.add_option("--depth", depth, "Recursive call-target disassembly depth (Default: 1)");
    app.add_option("--json", json_path, "Write a machine-readable report to this path");
    app.add_option("--meta", meta_paths, "Sidecar metadata file (key=value: pid, ppid, name, path, offset_v); "
                                         "repeatable, matched to inputs by position");

    auto* forge_cmd = app.add_subcommand("forge", "Regenerate a forged PE fixture from a JSON spec");
    std::string forge_spec_path;
    std::string forge_out = "forged.bin";
    forge_cmd->add_option("--spec", forge_spec_path, "Forge spec (JSON)")->required();
    forge_cmd->add_option("-o,--out", forge_out, "Output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    if (*forge_cmd) {
        try {
            return run_forge(forge_spec_path, forge_out);
        } catch (const std::exception& e) {
            std::cerr << "forge error: " << e.what() << "\n";
            return 1;
        }
    }

    if (inputs.empty()) {
        std::cerr << "error: at least one input file is required\n";
        return 1;
    }

    tlscheck::AnalyzeOptions options;
    options.disasm_bytes = disasm_bytes;
    options.depth = depth;
    options.scan_suspicious = scan_suspicious;
    if (layout_choice == "file") options.layout = LayoutChoice::File;
    else if (layout_choice == "memory") options.layout = LayoutChoice::Memory;

    if (!image_base.empty()) {
        try {
            options.image_base_override = parse_u64(image_base);
        } catch (const std::exception&) {
            std::cerr << "error: bad --image-base value: " << image_base << "\n";
            return 1;
        }
    }

    if (!regex_pattern.empty()) {
        try {
            options.regex = std::regex(regex_pattern);
        } catch (const std::regex_error& e) {
            std::cerr << "error: invalid --regex pattern: " << e.what() << "\n";
            return 1;
        }
    }

    tlscheck::RuleSet rules;
    if (!yara_path.empty()) {
        try {
            rules = tlscheck::parse_rules(read_text_file(yara_path));
        } catch (const std::exception& e) {
            std::cerr << "error: cannot load rule file " << yara_path << ": " << e.what() << "\n";
            return 1;
        }
        options.rules = &rules;
    }

    nlohmann::ordered_json json_reports = nlohmann::ordered_json::array();
    size_t analyzed = 0;
    size_t failed = 0;
    bool first_output = true;

    for (size_t i = 0; i < inputs.size(); ++i) {
        const std::string& path = inputs[i];
        tlscheck::TargetMeta meta;
        bool have_meta = i < meta_paths.size();
        try {
            if (have_meta) meta = load_meta(meta_paths[i]);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        if (meta.process_name.empty()) {
            auto slash = path.find_last_of('/');
            meta.process_name = slash == std::string::npos ? path : path.substr(slash + 1);
        }
        if (meta.path.empty()) meta.path = path;

        if (!pids.empty()) {
            if (!have_meta || !meta.pid) {
                std::cerr << "warning: --pid filter has no effect on " << path
                          << " (no sidecar pid); analyzing anyway\n";
            } else if (std::find(pids.begin(), pids.end(), *meta.pid) == pids.end()) {
                continue; // excluded
            }
        }

        try {
            auto bytes = read_file(path);
            auto report = tlscheck::analyze_image(bytes, options, std::move(meta));
            if (!first_output) std::cout << "\n";
            first_output = false;
            std::cout << tlscheck::render_text(report);
            if (!json_path.empty())
                json_reports.push_back(nlohmann::ordered_json::parse(tlscheck::render_json(report)));
            ++analyzed;
        } catch (const std::exception& e) {
            std::cerr << "error: " << path << ": " << e.what() << "\n";
            ++failed;
        }
    }

    if (!json_path.empty()) {
        std::ofstream out(json_path);
        if (!out) {
            std::cerr << "error: cannot write " << json_path << "\n";
            return 1;
        }
        out << json_reports.dump(2) << "\n";
    }

    if (failed > 0 && analyzed == 0) return 2;
    return 0;
}
