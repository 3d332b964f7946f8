#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlscheck/bytes.hpp"
#include "tlscheck/pe.hpp"

namespace tlscheck {

// Register ids carry their width; numbering within each bank follows the
// hardware encoding (rAX=0 .. r15=15).
enum class Reg : uint8_t {
    none,
    // 8-bit (legacy high-byte regs included)
    al, cl, dl, bl, ah, ch, dh, bh, spl, bpl, sil, dil,
    r8b, r9b, r10b, r11b, r12b, r13b, r14b, r15b,
    // 16-bit
    ax, cx, dx, bx, sp, bp, si, di,
    r8w, r9w, r10w, r11w, r12w, r13w, r14w, r15w,
    // 32-bit
    eax, ecx, edx, ebx, esp, ebp, esi, edi,
    r8d, r9d, r10d, r11d, r12d, r13d, r14d, r15d,
    // 64-bit
    rax, rcx, rdx, rbx, rsp, rbp, rsi, rdi,
    r8, r9, r10, r11, r12, r13, r14, r15,
    rip,
    fs, gs,
};

const char* reg_name(Reg r);

enum class Op : uint8_t {
    bad,
    add, adc, and_, call, cmp, dec, div_, idiv, imul, inc, int3,
    jmp, lea, mov, mul, neg, nop, not_, or_, pop, push, ret,
    rol, ror, rcl, rcr, shl, shr, sar, sbb, sub, test, xchg, xor_,
    // condition-code jumps, 0x70..0x7F order
    jo, jno, jb, jae, je, jne, jbe, ja, js, jns, jp, jnp, jl, jge, jle, jg,
};

const char* op_mnemonic(Op op);
bool op_is_jcc(Op op);

struct MemRef {
    Reg segment = Reg::none; // fs/gs when prefixed
    Reg base = Reg::none;    // Reg::rip for RIP-relative
    Reg index = Reg::none;
    uint8_t scale = 1;
    int64_t disp = 0;
    uint8_t size = 0;        // access width in bytes; 0 = untyped (lea)
    bool absolute = false;   // no base/index: disp is an absolute address
};

struct Operand {
    enum class Kind { Register, Immediate, Memory, RelativeTarget };
    Kind kind = Kind::Register;
    Reg reg = Reg::none;
    uint64_t value = 0;      // Immediate: sign-extended to operand width, stored masked
    uint8_t imm_width = 0;   // Immediate display width in bytes
    MemRef mem{};
    uint64_t target_va = 0;  // RelativeTarget: resolved absolute address
};

struct Instruction {
    uint64_t address = 0;
    uint8_t length = 0;
    Op op = Op::bad;
    std::string mnemonic;
    std::vector<Operand> operands;
    std::string text;
};

// Deterministic canonical rendering: lowercase mnemonic, ", "-separated
// operands, 0x hex (plain decimal for 0..9), "<size> ptr [...]" memory.
std::string render(const Instruction& insn);

// Linear sweep from base_va. Stops at the first undecodable byte, emitting a
// terminal "(bad)" pseudo-instruction of length 1. Never reads outside bytes.
std::vector<Instruction> decode(ByteSpan bytes, uint64_t base_va, Arch arch);

// call/jmp/jcc with a relative operand resolve to address+length+disp.
std::optional<uint64_t> resolve_rel_target(const Instruction& insn);

} // namespace tlscheck
