#include "tlscheck/tls.hpp"

namespace tlscheck {

std::optional<TlsDirectoryInfo> locate_tls_directory(const PeImage& img,
                                                     std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& w) {
        if (warnings) warnings->push_back(w);
    };

    DataDirectoryEntry entry = data_directory(img, kTlsDirectoryIndex);
    if (!entry.present()) return std::nullopt;

    auto off = rva_to_offset(img, entry.virtual_address);
    if (!off.ok()) {
        warn("TLS directory rva " + hex_va(entry.virtual_address) + " does not translate; treated as absent");
        return std::nullopt;
    }

    ByteReader r(img.raw);
    TlsDirectoryInfo info;
    info.directory_rva = entry.virtual_address;
    if (img.arch == Arch::X64) {
        info.bitness = TlsBitness::Bits64;
        auto start = r.u64(*off), end = r.u64(*off + 8), index = r.u64(*off + 16), cbs = r.u64(*off + 24);
        auto zero = r.u32(*off + 32), chars = r.u32(*off + 36);
        if (!start || !end || !index || !cbs || !zero || !chars) {
            warn("TLS directory truncated; treated as absent");
            return std::nullopt;
        }
        info.start_address_of_raw_data = *start;
        info.end_address_of_raw_data = *end;
        info.address_of_index = *index;
        info.address_of_callbacks = *cbs;
        info.size_of_zero_fill = *zero;
        info.characteristics = *chars;
    } else {
        info.bitness = TlsBitness::Bits32;
        auto start = r.u32(*off), end = r.u32(*off + 4), index = r.u32(*off + 8), cbs = r.u32(*off + 12);
        auto zero = r.u32(*off + 16), chars = r.u32(*off + 20);
        if (!start || !end || !index || !cbs || !zero || !chars) {
            warn("TLS directory truncated; treated as absent");
            return std::nullopt;
        }
        info.start_address_of_raw_data = *start;
        info.end_address_of_raw_data = *end;
        info.address_of_index = *index;
        info.address_of_callbacks = *cbs;
        info.size_of_zero_fill = *zero;
        info.characteristics = *chars;
    }
    return info;
}

TlsExtractionResult enumerate_callbacks(const PeImage& img, const TlsDirectoryInfo& dir,
                                        size_t max_callbacks) {
    TlsExtractionResult result;
    result.directory = dir;
    result.status = TlsStatus::EmptyCallbackTable;

    uint64_t array_va = dir.address_of_callbacks;
    if (array_va == 0) {
        result.warnings.push_back("TLS directory has a null AddressOfCallBacks");
        return result;
    }

    // AddressOfCallBacks holds a VA per the format; some packers store an RVA
    // there, so a value below the image base gets retried as one.
    auto array_rva = va_to_rva(img, array_va);
    bool rva_mode = false;
    if (!array_rva.ok() && array_va < img.image_base && array_va < img.size_of_image) {
        array_rva = {static_cast<uint32_t>(array_va), TranslateError::OutOfImage};
        rva_mode = true;
        result.warnings.push_back("nonstandard-rva-callbacks: AddressOfCallBacks looks like an RVA");
    }
    if (!array_rva.ok()) {
        result.warnings.push_back("callback array VA " + hex_va(array_va) + " is outside the image");
        return result;
    }

    auto array_off = rva_to_offset(img, *array_rva);
    if (!array_off.ok()) {
        result.warnings.push_back("callback array rva " + hex_va(*array_rva) + " does not translate");
        return result;
    }

    ByteReader r(img.raw);
    size_t ptr_size = dir.bitness == TlsBitness::Bits64 ? 8 : 4;
    for (size_t i = 0;; ++i) {
        if (i >= max_callbacks) {
            result.warnings.push_back("callback array truncated at " + std::to_string(max_callbacks) + " entries");
            break;
        }
        uint64_t entry_off = *array_off + i * ptr_size;
        std::optional<uint64_t> ptr;
        if (ptr_size == 8) {
            ptr = r.u64(entry_off);
        } else {
            auto v = r.u32(entry_off);
            if (v) ptr = *v;
        }
        if (!ptr) {
            result.warnings.push_back("callback array runs past readable bytes");
            break;
        }
        if (*ptr == 0) break;

        uint64_t cb_va = rva_mode ? img.image_base + *ptr : *ptr;
        auto cb_rva = va_to_rva(img, cb_va);
        if (!cb_rva.ok()) {
            result.unresolved_vas.push_back(*ptr);
            continue;
        }
        auto cb_off = rva_to_offset(img, *cb_rva);
        if (!cb_off.ok()) {
            result.unresolved_vas.push_back(*ptr);
            continue;
        }
        CallbackRecord cb;
        cb.va = img.image_base + *cb_rva;
        cb.rva = *cb_rva;
        cb.file_offset = *cb_off;
        result.callbacks.push_back(std::move(cb));
    }

    if (!result.callbacks.empty()) result.status = TlsStatus::CallbacksFound;
    return result;
}

std::vector<uint8_t> read_callback_bytes(const PeImage& img, CallbackRecord& cb, size_t budget) {
    ByteReader r(img.raw);
    if (cb.file_offset >= img.raw.size()) {
        cb.truncated = true;
        return {};
    }
    auto bytes = r.bytes(cb.file_offset, budget);
    cb.truncated = bytes.size() < budget;
    return bytes;
}

} // namespace tlscheck
