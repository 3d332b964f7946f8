#include "tlscheck/disasm.hpp"

#include <cstdio>

namespace tlscheck {

namespace {

const char* kRegNames[] = {
    "?",
    "al", "cl", "dl", "bl", "ah", "ch", "dh", "bh", "spl", "bpl", "sil", "dil",
    "r8b", "r9b", "r10b", "r11b", "r12b", "r13b", "r14b", "r15b",
    "ax", "cx", "dx", "bx", "sp", "bp", "si", "di",
    "r8w", "r9w", "r10w", "r11w", "r12w", "r13w", "r14w", "r15w",
    "eax", "ecx", "edx", "ebx", "esp", "ebp", "esi", "edi",
    "r8d", "r9d", "r10d", "r11d", "r12d", "r13d", "r14d", "r15d",
    "rax", "rcx", "rdx", "rbx", "rsp", "rbp", "rsi", "rdi",
    "r8", "r9", "r10", "r11", "r12", "r13", "r14", "r15",
    "rip",
    "fs", "gs",
};

struct OpName { Op op; const char* name; };
const OpName kOpNames[] = {
    {Op::bad, "(bad)"},
    {Op::add, "add"}, {Op::adc, "adc"}, {Op::and_, "and"}, {Op::call, "call"},
    {Op::cmp, "cmp"}, {Op::dec, "dec"}, {Op::div_, "div"}, {Op::idiv, "idiv"},
    {Op::imul, "imul"}, {Op::inc, "inc"}, {Op::int3, "int3"}, {Op::jmp, "jmp"},
    {Op::lea, "lea"}, {Op::mov, "mov"}, {Op::mul, "mul"}, {Op::neg, "neg"},
    {Op::nop, "nop"}, {Op::not_, "not"}, {Op::or_, "or"}, {Op::pop, "pop"},
    {Op::push, "push"}, {Op::ret, "ret"}, {Op::rol, "rol"}, {Op::ror, "ror"},
    {Op::rcl, "rcl"}, {Op::rcr, "rcr"}, {Op::shl, "shl"}, {Op::shr, "shr"},
    {Op::sar, "sar"}, {Op::sbb, "sbb"}, {Op::sub, "sub"}, {Op::test, "test"},
    {Op::xchg, "xchg"}, {Op::xor_, "xor"},
    {Op::jo, "jo"}, {Op::jno, "jno"}, {Op::jb, "jb"}, {Op::jae, "jae"},
    {Op::je, "je"}, {Op::jne, "jne"}, {Op::jbe, "jbe"}, {Op::ja, "ja"},
    {Op::js, "js"}, {Op::jns, "jns"}, {Op::jp, "jp"}, {Op::jnp, "jnp"},
    {Op::jl, "jl"}, {Op::jge, "jge"}, {Op::jle, "jle"}, {Op::jg, "jg"},
};

Reg reg8(unsigned code, bool rex_any) {
    static const Reg plain[8] = {Reg::al, Reg::cl, Reg::dl, Reg::bl, Reg::ah, Reg::ch, Reg::dh, Reg::bh};
    static const Reg rex_low[8] = {Reg::al, Reg::cl, Reg::dl, Reg::bl, Reg::spl, Reg::bpl, Reg::sil, Reg::dil};
    if (code < 8) return rex_any ? rex_low[code] : plain[code];
    return static_cast<Reg>(static_cast<unsigned>(Reg::r8b) + (code - 8));
}
Reg reg16(unsigned code) { return static_cast<Reg>(static_cast<unsigned>(Reg::ax) + code); }
Reg reg32(unsigned code) { return static_cast<Reg>(static_cast<unsigned>(Reg::eax) + code); }
Reg reg64(unsigned code) { return static_cast<Reg>(static_cast<unsigned>(Reg::rax) + code); }

Reg reg_sized(unsigned code, unsigned bytes, bool rex_any) {
    switch (bytes) {
    case 1: return reg8(code, rex_any);
    case 2: return reg16(code);
    case 4: return reg32(code);
    default: return reg64(code);
    }
}

uint64_t mask_width(uint64_t v, unsigned bytes) {
    return bytes >= 8 ? v : v & ((uint64_t(1) << (8 * bytes)) - 1);
}

// Instruction byte cursor, capped at the architectural 15-byte limit.
struct Cursor {
    ByteSpan bytes;
    size_t pos = 0;
    bool failed = false;

    bool ok() const { return !failed; }
    uint8_t peek() {
        if (pos >= bytes.size() || pos >= 15) { failed = true; return 0; }
        return bytes[pos];
    }
    uint8_t u8() {
        uint8_t v = peek();
        if (!failed) ++pos;
        return v;
    }
    uint16_t u16() { uint16_t a = u8(); return uint16_t(a | (uint16_t(u8()) << 8)); }
    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(u8()) << (8 * i);
        return v;
    }
    uint64_t u64() {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(u8()) << (8 * i);
        return v;
    }
};

struct Prefixes {
    bool opsize = false;
    Reg segment = Reg::none;
    uint8_t rex = 0;
    bool rex_w() const { return rex & 8; }
    bool rex_r() const { return rex & 4; }
    bool rex_x() const { return rex & 2; }
    bool rex_b() const { return rex & 1; }
    bool rex_any() const { return rex != 0; }
};

Operand reg_operand(Reg r) {
    Operand op;
    op.kind = Operand::Kind::Register;
    op.reg = r;
    return op;
}

Operand imm_operand(uint64_t v, unsigned bytes) {
    Operand op;
    op.kind = Operand::Kind::Immediate;
    op.value = mask_width(v, bytes);
    op.imm_width = uint8_t(bytes);
    return op;
}

struct ModRm {
    uint8_t mod = 0;
    unsigned reg = 0;  // REX.R applied
    Operand rm;        // Register or Memory
};

// Decodes ModRM (+SIB, displacement). mem_size is the access width tag; 0
// leaves the memory operand untyped (lea).
ModRm read_modrm(Cursor& c, Arch arch, const Prefixes& p, unsigned op_bytes, unsigned mem_size) {
    ModRm out;
    uint8_t b = c.u8();
    out.mod = b >> 6;
    out.reg = ((b >> 3) & 7) | (p.rex_r() ? 8 : 0);
    unsigned rm = b & 7;

    if (out.mod == 3) {
        out.rm = reg_operand(reg_sized(rm | (p.rex_b() ? 8 : 0), op_bytes, p.rex_any()));
        return out;
    }

    MemRef m;
    m.segment = p.segment;
    m.size = uint8_t(mem_size);
    bool x64 = arch == Arch::X64;
    auto addr_reg = [&](unsigned code) { return x64 ? reg64(code) : reg32(code); };

    bool disp32_follows = false;
    if (rm == 4) {
        uint8_t sib = c.u8();
        unsigned ss = sib >> 6;
        unsigned idx = (sib >> 3) & 7;
        unsigned base = sib & 7;
        unsigned index_code = idx | (p.rex_x() ? 8 : 0);
        if (index_code != 4) { // encoding 4 (no REX.X) means "no index"
            m.index = addr_reg(index_code);
            m.scale = uint8_t(1u << ss);
        }
        if (base == 5 && out.mod == 0) {
            disp32_follows = true; // no base register
        } else {
            m.base = addr_reg(base | (p.rex_b() ? 8 : 0));
        }
    } else if (rm == 5 && out.mod == 0) {
        if (x64) {
            m.base = Reg::rip;
            disp32_follows = true;
        } else {
            disp32_follows = true; // 32-bit absolute
        }
    } else {
        m.base = addr_reg(rm | (p.rex_b() ? 8 : 0));
    }

    if (out.mod == 1) {
        m.disp = int8_t(c.u8());
    } else if (out.mod == 2 || disp32_follows) {
        int64_t d = int32_t(c.u32());
        m.disp = d;
    }
    if (m.base == Reg::none && m.index == Reg::none) {
        m.absolute = true;
        if (!x64) m.disp = int64_t(uint32_t(m.disp)); // 32-bit address space
    }

    Operand op;
    op.kind = Operand::Kind::Memory;
    op.mem = m;
    out.rm = op;
    return out;
}

struct Decoded {
    Op op = Op::bad;
    std::vector<Operand> operands;
};

Operand rel_operand(uint64_t va, size_t length, int64_t disp, Arch arch) {
    Operand op;
    op.kind = Operand::Kind::RelativeTarget;
    uint64_t target = va + length + uint64_t(disp);
    if (arch == Arch::X86) target &= 0xFFFFFFFFull;
    op.target_va = target;
    return op;
}

const Op kAluOps[8] = {Op::add, Op::or_, Op::adc, Op::sbb, Op::and_, Op::sub, Op::xor_, Op::cmp};
const Op kShiftOps[8] = {Op::rol, Op::ror, Op::rcl, Op::rcr, Op::shl, Op::shr, Op::shl, Op::sar};
const Op kGrp3Ops[8] = {Op::test, Op::bad, Op::not_, Op::neg, Op::mul, Op::imul, Op::div_, Op::idiv};

// Decodes a single instruction; Op::bad on anything outside the supported
// subset. `va` is the address of the first byte.
Decoded decode_one(Cursor& c, uint64_t va, Arch arch, Prefixes& p) {
    Decoded d;
    bool x64 = arch == Arch::X64;

    for (;;) {
        uint8_t b = c.peek();
        if (c.failed) return d;
        if (b == 0x66) { p.opsize = true; p.rex = 0; c.u8(); continue; }
        if (b == 0x64) { p.segment = Reg::fs; p.rex = 0; c.u8(); continue; }
        if (b == 0x65) { p.segment = Reg::gs; p.rex = 0; c.u8(); continue; }
        if (x64 && b >= 0x40 && b <= 0x4F) { p.rex = b; c.u8(); continue; }
        break;
    }

    uint8_t opc = c.u8();
    if (c.failed) return d;

    unsigned osz = p.rex_w() ? 8 : p.opsize ? 2 : 4;
    unsigned stack_osz = p.opsize ? 2 : (x64 ? 8 : 4);
    auto eax_reg = [&](unsigned bytes) { return reg_sized(0, bytes, false); };

    auto finish = [&](Op op, std::initializer_list<Operand> ops) {
        d.op = op;
        d.operands.assign(ops);
    };

    // ALU row: 00-3D in 8-opcode strides
    if (opc < 0x40 && (opc & 7) <= 5) {
        Op op = kAluOps[opc >> 3];
        switch (opc & 7) {
        case 0: { auto m = read_modrm(c, arch, p, 1, 1); finish(op, {m.rm, reg_operand(reg8(m.reg, p.rex_any()))}); return d; }
        case 1: { auto m = read_modrm(c, arch, p, osz, osz); finish(op, {m.rm, reg_operand(reg_sized(m.reg, osz, p.rex_any()))}); return d; }
        case 2: { auto m = read_modrm(c, arch, p, 1, 1); finish(op, {reg_operand(reg8(m.reg, p.rex_any())), m.rm}); return d; }
        case 3: { auto m = read_modrm(c, arch, p, osz, osz); finish(op, {reg_operand(reg_sized(m.reg, osz, p.rex_any())), m.rm}); return d; }
        case 4: finish(op, {reg_operand(Reg::al), imm_operand(c.u8(), 1)}); return d;
        case 5: {
            uint64_t imm = osz == 2 ? c.u16() : uint64_t(int64_t(int32_t(c.u32())));
            finish(op, {reg_operand(eax_reg(osz)), imm_operand(imm, osz)});
            return d;
        }
        }
    }

    switch (opc) {
    case 0x0F: { // two-byte opcodes
        uint8_t opc2 = c.u8();
        if (c.failed) return d;
        if (opc2 >= 0x80 && opc2 <= 0x8F) {
            if (p.opsize) return d; // 16-bit branches stay out of the subset
            int64_t disp = int32_t(c.u32());
            if (c.failed) return d;
            Op op = static_cast<Op>(static_cast<unsigned>(Op::jo) + (opc2 - 0x80));
            finish(op, {rel_operand(va, c.pos, disp, arch)});
            return d;
        }
        if (opc2 == 0x1F) {
            auto m = read_modrm(c, arch, p, osz, osz);
            if (m.reg % 8 != 0 || m.rm.kind != Operand::Kind::Memory) return d;
            finish(Op::nop, {m.rm});
            return d;
        }
        return d;
    }

    case 0x50: case 0x51: case 0x52: case 0x53:
    case 0x54: case 0x55: case 0x56: case 0x57:
        finish(Op::push, {reg_operand(reg_sized((opc - 0x50) | (p.rex_b() ? 8 : 0), stack_osz, p.rex_any()))});
        return d;
    case 0x58: case 0x59: case 0x5A: case 0x5B:
    case 0x5C: case 0x5D: case 0x5E: case 0x5F:
        finish(Op::pop, {reg_operand(reg_sized((opc - 0x58) | (p.rex_b() ? 8 : 0), stack_osz, p.rex_any()))});
        return d;

    case 0x68: {
        uint64_t imm = stack_osz == 2 ? c.u16() : uint64_t(int64_t(int32_t(c.u32())));
        finish(Op::push, {imm_operand(imm, stack_osz)});
        return d;
    }
    case 0x6A:
        finish(Op::push, {imm_operand(uint64_t(int64_t(int8_t(c.u8()))), stack_osz)});
        return d;

    case 0x80: {
        auto m = read_modrm(c, arch, p, 1, 1);
        finish(kAluOps[m.reg % 8], {m.rm, imm_operand(c.u8(), 1)});
        return d;
    }
    case 0x81: {
        auto m = read_modrm(c, arch, p, osz, osz);
        uint64_t imm = osz == 2 ? c.u16() : uint64_t(int64_t(int32_t(c.u32())));
        finish(kAluOps[m.reg % 8], {m.rm, imm_operand(imm, osz)});
        return d;
    }
    case 0x83: {
        auto m = read_modrm(c, arch, p, osz, osz);
        finish(kAluOps[m.reg % 8], {m.rm, imm_operand(uint64_t(int64_t(int8_t(c.u8()))), osz)});
        return d;
    }

    case 0x84: { auto m = read_modrm(c, arch, p, 1, 1); finish(Op::test, {m.rm, reg_operand(reg8(m.reg, p.rex_any()))}); return d; }
    case 0x85: { auto m = read_modrm(c, arch, p, osz, osz); finish(Op::test, {m.rm, reg_operand(reg_sized(m.reg, osz, p.rex_any()))}); return d; }
    case 0x86: { auto m = read_modrm(c, arch, p, 1, 1); finish(Op::xchg, {m.rm, reg_operand(reg8(m.reg, p.rex_any()))}); return d; }
    case 0x87: { auto m = read_modrm(c, arch, p, osz, osz); finish(Op::xchg, {m.rm, reg_operand(reg_sized(m.reg, osz, p.rex_any()))}); return d; }

    case 0x88: { auto m = read_modrm(c, arch, p, 1, 1); finish(Op::mov, {m.rm, reg_operand(reg8(m.reg, p.rex_any()))}); return d; }
    case 0x89: { auto m = read_modrm(c, arch, p, osz, osz); finish(Op::mov, {m.rm, reg_operand(reg_sized(m.reg, osz, p.rex_any()))}); return d; }
    case 0x8A: { auto m = read_modrm(c, arch, p, 1, 1); finish(Op::mov, {reg_operand(reg8(m.reg, p.rex_any())), m.rm}); return d; }
    case 0x8B: { auto m = read_modrm(c, arch, p, osz, osz); finish(Op::mov, {reg_operand(reg_sized(m.reg, osz, p.rex_any())), m.rm}); return d; }

    case 0x8D: {
        auto m = read_modrm(c, arch, p, osz, 0);
        if (m.rm.kind != Operand::Kind::Memory) return d;
        finish(Op::lea, {reg_operand(reg_sized(m.reg, osz, p.rex_any())), m.rm});
        return d;
    }
    case 0x8F: {
        auto m = read_modrm(c, arch, p, stack_osz, stack_osz);
        if (m.reg % 8 != 0) return d;
        finish(Op::pop, {m.rm});
        return d;
    }

    case 0x90:
        if (!p.rex_b() && !p.opsize && !p.rex_w()) { finish(Op::nop, {}); return d; }
        [[fallthrough]];
    case 0x91: case 0x92: case 0x93:
    case 0x94: case 0x95: case 0x96: case 0x97:
        finish(Op::xchg, {reg_operand(reg_sized((opc - 0x90) | (p.rex_b() ? 8 : 0), osz, p.rex_any())),
                          reg_operand(eax_reg(osz))});
        return d;

    case 0xA0: case 0xA1: case 0xA2: case 0xA3: {
        unsigned width = (opc & 1) ? osz : 1;
        Operand memop;
        memop.kind = Operand::Kind::Memory;
        memop.mem.segment = p.segment;
        memop.mem.size = uint8_t(width);
        memop.mem.absolute = true;
        memop.mem.disp = x64 ? int64_t(c.u64()) : int64_t(uint64_t(c.u32()));
        Operand regop = reg_operand(width == 1 ? Reg::al : eax_reg(width));
        if (opc < 0xA2) finish(Op::mov, {regop, memop});
        else finish(Op::mov, {memop, regop});
        return d;
    }

    case 0xA8: finish(Op::test, {reg_operand(Reg::al), imm_operand(c.u8(), 1)}); return d;
    case 0xA9: {
        uint64_t imm = osz == 2 ? c.u16() : uint64_t(int64_t(int32_t(c.u32())));
        finish(Op::test, {reg_operand(eax_reg(osz)), imm_operand(imm, osz)});
        return d;
    }

    case 0xB0: case 0xB1: case 0xB2: case 0xB3:
    case 0xB4: case 0xB5: case 0xB6: case 0xB7:
        finish(Op::mov, {reg_operand(reg8((opc - 0xB0) | (p.rex_b() ? 8 : 0), p.rex_any())),
                         imm_operand(c.u8(), 1)});
        return d;

    case 0xB8: case 0xB9: case 0xBA: case 0xBB:
    case 0xBC: case 0xBD: case 0xBE: case 0xBF: {
        uint64_t imm = osz == 2 ? c.u16() : osz == 8 ? c.u64() : c.u32();
        finish(Op::mov, {reg_operand(reg_sized((opc - 0xB8) | (p.rex_b() ? 8 : 0), osz, p.rex_any())),
                         imm_operand(imm, osz)});
        return d;
    }

    case 0xC0: {
        auto m = read_modrm(c, arch, p, 1, 1);
        finish(kShiftOps[m.reg % 8], {m.rm, imm_operand(c.u8(), 1)});
        return d;
    }
    case 0xC1: {
        auto m = read_modrm(c, arch, p, osz, osz);
        finish(kShiftOps[m.reg % 8], {m.rm, imm_operand(c.u8(), 1)});
        return d;
    }
    case 0xD0: {
        auto m = read_modrm(c, arch, p, 1, 1);
        finish(kShiftOps[m.reg % 8], {m.rm, imm_operand(1, 1)});
        return d;
    }
    case 0xD1: {
        auto m = read_modrm(c, arch, p, osz, osz);
        finish(kShiftOps[m.reg % 8], {m.rm, imm_operand(1, 1)});
        return d;
    }
    case 0xD2: {
        auto m = read_modrm(c, arch, p, 1, 1);
        finish(kShiftOps[m.reg % 8], {m.rm, reg_operand(Reg::cl)});
        return d;
    }
    case 0xD3: {
        auto m = read_modrm(c, arch, p, osz, osz);
        finish(kShiftOps[m.reg % 8], {m.rm, reg_operand(Reg::cl)});
        return d;
    }

    case 0xC2: finish(Op::ret, {imm_operand(c.u16(), 2)}); return d;
    case 0xC3: finish(Op::ret, {}); return d;

    case 0xC6: {
        auto m = read_modrm(c, arch, p, 1, 1);
        if (m.reg % 8 != 0) return d;
        finish(Op::mov, {m.rm, imm_operand(c.u8(), 1)});
        return d;
    }
    case 0xC7: {
        auto m = read_modrm(c, arch, p, osz, osz);
        if (m.reg % 8 != 0) return d;
        uint64_t imm = osz == 2 ? c.u16() : uint64_t(int64_t(int32_t(c.u32())));
        finish(Op::mov, {m.rm, imm_operand(imm, osz)});
        return d;
    }

    case 0xCC: finish(Op::int3, {}); return d;

    case 0xE8: {
        if (p.opsize) return d;
        int64_t disp = int32_t(c.u32());
        if (c.failed) return d;
        finish(Op::call, {rel_operand(va, c.pos, disp, arch)});
        return d;
    }
    case 0xE9: {
        if (p.opsize) return d;
        int64_t disp = int32_t(c.u32());
        if (c.failed) return d;
        finish(Op::jmp, {rel_operand(va, c.pos, disp, arch)});
        return d;
    }
    case 0xEB: {
        int64_t disp = int8_t(c.u8());
        if (c.failed) return d;
        finish(Op::jmp, {rel_operand(va, c.pos, disp, arch)});
        return d;
    }

    case 0xF6: {
        auto m = read_modrm(c, arch, p, 1, 1);
        Op op = kGrp3Ops[m.reg % 8];
        if (op == Op::bad) return d;
        if (op == Op::test) finish(op, {m.rm, imm_operand(c.u8(), 1)});
        else finish(op, {m.rm});
        return d;
    }
    case 0xF7: {
        auto m = read_modrm(c, arch, p, osz, osz);
        Op op = kGrp3Ops[m.reg % 8];
        if (op == Op::bad) return d;
        if (op == Op::test) {
            uint64_t imm = osz == 2 ? c.u16() : uint64_t(int64_t(int32_t(c.u32())));
            finish(op, {m.rm, imm_operand(imm, osz)});
        } else {
            finish(op, {m.rm});
        }
        return d;
    }

    case 0xFE: {
        auto m = read_modrm(c, arch, p, 1, 1);
        if (m.reg % 8 == 0) finish(Op::inc, {m.rm});
        else if (m.reg % 8 == 1) finish(Op::dec, {m.rm});
        return d;
    }
    case 0xFF: {
        unsigned group_size = osz;
        // call/jmp/push default to the full pointer width
        uint8_t modrm_peek = c.peek();
        unsigned sel = (modrm_peek >> 3) & 7;
        if (sel == 2 || sel == 4 || sel == 6)
            group_size = sel == 6 ? stack_osz : (x64 ? 8 : p.opsize ? 2 : 4);
        auto m = read_modrm(c, arch, p, group_size, group_size);
        switch (sel) {
        case 0: finish(Op::inc, {m.rm}); return d;
        case 1: finish(Op::dec, {m.rm}); return d;
        case 2: finish(Op::call, {m.rm}); return d;
        case 4: finish(Op::jmp, {m.rm}); return d;
        case 6: finish(Op::push, {m.rm}); return d;
        default: return d;
        }
    }

    default:
        break;
    }

    // Short conditional jumps
    if (opc >= 0x70 && opc <= 0x7F) {
        int64_t disp = int8_t(c.u8());
        if (c.failed) return d;
        Op op = static_cast<Op>(static_cast<unsigned>(Op::jo) + (opc - 0x70));
        finish(op, {rel_operand(va, c.pos, disp, arch)});
        return d;
    }
    // inc/dec r32 only exist outside long mode (REX space in x64)
    if (!x64 && opc >= 0x40 && opc <= 0x4F) {
        Op op = opc < 0x48 ? Op::inc : Op::dec;
        finish(op, {reg_operand(reg_sized(opc & 7, osz, false))});
        return d;
    }

    return d;
}

std::string fmt_num(uint64_t v) {
    char buf[24];
    if (v < 10) std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(v));
    else std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

const char* mem_size_name(uint8_t size) {
    switch (size) {
    case 1: return "byte ptr ";
    case 2: return "word ptr ";
    case 4: return "dword ptr ";
    case 8: return "qword ptr ";
    default: return "";
    }
}

std::string render_mem(const MemRef& m) {
    std::string out = mem_size_name(m.size);
    if (m.segment != Reg::none) {
        out += reg_name(m.segment);
        out += ':';
    }
    out += '[';
    bool any = false;
    if (m.base != Reg::none) {
        out += reg_name(m.base);
        any = true;
    }
    if (m.index != Reg::none) {
        if (any) out += " + ";
        out += reg_name(m.index);
        if (m.scale != 1) {
            out += '*';
            out += char('0' + m.scale);
        }
        any = true;
    }
    if (!any) {
        out += fmt_num(uint64_t(m.disp));
    } else if (m.disp != 0) {
        if (m.disp < 0) {
            out += " - ";
            out += fmt_num(uint64_t(-m.disp));
        } else {
            out += " + ";
            out += fmt_num(uint64_t(m.disp));
        }
    }
    out += ']';
    return out;
}

} // namespace

const char* reg_name(Reg r) { return kRegNames[static_cast<unsigned>(r)]; }

const char* op_mnemonic(Op op) {
    for (const auto& e : kOpNames)
        if (e.op == op) return e.name;
    return "(bad)";
}

bool op_is_jcc(Op op) { return op >= Op::jo && op <= Op::jg; }

std::string render(const Instruction& insn) {
    if (insn.op == Op::bad) return "(bad)";
    std::string out = op_mnemonic(insn.op);
    bool first = true;
    for (const auto& operand : insn.operands) {
        out += first ? " " : ", ";
        first = false;
        switch (operand.kind) {
        case Operand::Kind::Register:
            out += reg_name(operand.reg);
            break;
        case Operand::Kind::Immediate:
            out += fmt_num(operand.value);
            break;
        case Operand::Kind::RelativeTarget:
            out += fmt_num(operand.target_va);
            break;
        case Operand::Kind::Memory:
            out += render_mem(operand.mem);
            break;
        }
    }
    return out;
}

std::vector<Instruction> decode(ByteSpan bytes, uint64_t base_va, Arch arch) {
    std::vector<Instruction> out;
    size_t pos = 0;
    while (pos < bytes.size()) {
        uint64_t va = base_va + pos;
        Cursor c{bytes.subspan(pos)};
        Prefixes p;
        Decoded dec = decode_one(c, va, arch, p);

        Instruction insn;
        insn.address = va;
        if (dec.op == Op::bad || c.failed) {
            insn.op = Op::bad;
            insn.length = 1;
            insn.mnemonic = "(bad)";
            insn.text = "(bad)";
            out.push_back(std::move(insn));
            break;
        }
        insn.op = dec.op;
        insn.length = uint8_t(c.pos);
        insn.mnemonic = op_mnemonic(dec.op);
        insn.operands = std::move(dec.operands);
        insn.text = render(insn);
        out.push_back(std::move(insn));
        pos += insn.length;
    }
    return out;
}

std::optional<uint64_t> resolve_rel_target(const Instruction& insn) {
    if (insn.op != Op::call && insn.op != Op::jmp && !op_is_jcc(insn.op)) return std::nullopt;
    for (const auto& op : insn.operands)
        if (op.kind == Operand::Kind::RelativeTarget) return op.target_va;
    return std::nullopt;
}

} // namespace tlscheck
