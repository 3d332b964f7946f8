// Fixture generator. Re-run after decoder or rule-engine changes:
//
//   cargo run --release -- <fixtures-dir>
//
// Writes decoder_golden.txt (reference disassembly of instruction encodings
// drawn from the supported subset) and the rules_* fixtures (match decisions
// of a reference YARA engine over the committed rule set and buffers).

use iced_x86::{Decoder, DecoderOptions, Formatter, IntelFormatter, MemorySizeOptions};
use std::fmt::Write as _;
use std::path::Path;

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 16
    }
    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
    fn byte(&mut self) -> u8 {
        (self.next() & 0xFF) as u8
    }
    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.below(xs.len() as u64) as usize]
    }
}

fn make_formatter() -> IntelFormatter {
    let mut f = IntelFormatter::new();
    let o = f.options_mut();
    o.set_uppercase_hex(false);
    o.set_hex_prefix("0x");
    o.set_hex_suffix("");
    o.set_space_after_operand_separator(true);
    o.set_space_between_memory_add_operators(true);
    o.set_space_between_memory_mul_operators(false);
    o.set_rip_relative_addresses(true);
    o.set_memory_size_options(MemorySizeOptions::Always);
    o.set_show_branch_size(false);
    o.set_small_hex_numbers_in_decimal(true);
    o.set_branch_leading_zeros(false);
    o.set_displacement_leading_zeros(false);
    o.set_leading_zeros(false);
    o.set_signed_memory_displacements(true);
    f
}

const SUPPORTED: &[&str] = &[
    "add", "adc", "and", "call", "cmp", "dec", "div", "idiv", "imul", "inc", "int3", "jmp",
    "lea", "mov", "mul", "neg", "nop", "not", "or", "pop", "push", "ret", "rol", "ror", "rcl",
    "rcr", "shl", "shr", "sar", "sbb", "sub", "test", "xchg", "xor", "jo", "jno", "jb", "jae",
    "je", "jne", "jbe", "ja", "js", "jns", "jp", "jnp", "jl", "jge", "jle", "jg",
];

fn dis_one(bytes: &[u8], bitness: u32, ip: u64) -> Option<(usize, String)> {
    let mut decoder = Decoder::with_ip(bitness, bytes, ip, DecoderOptions::NONE);
    if !decoder.can_decode() {
        return None;
    }
    let insn = decoder.decode();
    if insn.is_invalid() || insn.len() != bytes.len() {
        return None;
    }
    let mut f = make_formatter();
    let mut out = String::new();
    f.format(&insn, &mut out);
    let mnemonic = out.split_whitespace().next().unwrap_or("");
    if !SUPPORTED.contains(&mnemonic) {
        return None;
    }
    Some((insn.len(), out))
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::new();
    for b in bytes {
        write!(s, "{:02x}", b).unwrap();
    }
    s
}

// Random ModRM + SIB + displacement for the plain addressing forms the
// decoder supports. Returns encoding tail bytes; reg field is forced to
// `reg_field`.
fn modrm_bytes(rng: &mut Lcg, x64: bool, reg_field: u8, allow_reg_direct: bool) -> Vec<u8> {
    let mut out = Vec::new();
    let mode = if allow_reg_direct { rng.below(4) } else { rng.below(3) } as u8;
    let mod_bits = match mode {
        3 => 3,
        m => m,
    };
    let mut rm = (rng.below(8)) as u8;
    if mod_bits != 3 && rm == 4 {
        // SIB form
        let scale = (rng.below(4)) as u8;
        let index = (rng.below(8)) as u8;
        let base = (rng.below(8)) as u8;
        out.push((mod_bits << 6) | (reg_field << 3) | 4);
        out.push((scale << 6) | (index << 3) | base);
        if base == 5 && mod_bits == 0 {
            for _ in 0..4 {
                out.push(rng.byte());
            }
        }
    } else {
        if mod_bits == 3 && !allow_reg_direct {
            rm = 0;
        }
        out.push((mod_bits << 6) | (reg_field << 3) | rm);
        if mod_bits == 0 && rm == 5 {
            for _ in 0..4 {
                out.push(rng.byte());
            }
            let _ = x64; // rip-relative in 64-bit, absolute in 32-bit
        }
    }
    match out[0] >> 6 {
        1 => out.push(rng.byte()),
        2 => {
            for _ in 0..4 {
                out.push(rng.byte());
            }
        }
        _ => {}
    }
    out
}

fn gen_decoder_golden(path: &Path) {
    let mut rng = Lcg(0x1ce5_c0de_2024_0001);
    let mut lines: Vec<String> = Vec::new();
    lines.push("# arch|hex|length|text".to_string());

    let mut emit = |arch: u32, bytes: &[u8]| -> bool {
        let ip: u64 = if arch == 32 { 0x401000 } else { 0x140001000 };
        if let Some((len, text)) = dis_one(bytes, arch, ip) {
            lines.push(format!("{}|{}|{}|{}", if arch == 32 { "x86" } else { "x64" }, hex(bytes), len, text));
            true
        } else {
            false
        }
    };

    // Pinned encodings: exact forms the analyzer renders in reports, plus
    // formatter corner cases.
    let pins32: &[&[u8]] = &[
        &[0x64, 0xa1, 0x2c, 0x00, 0x00, 0x00],
        &[0x6a, 0x00],
        &[0x68, 0x10, 0x21, 0x40, 0x00],
        &[0x8b, 0x00],
        &[0xc7, 0x40, 0x04, 0x1f, 0x02, 0x00, 0x00],
        &[0xff, 0x15, 0x98, 0x20, 0x40, 0x00],
        &[0xc2, 0x0c, 0x00],
        &[0xcc],
        &[0x90],
        &[0x66, 0x90],
        &[0x87, 0xc0],
        &[0x89, 0xff],
        &[0x6a, 0xdb],
        &[0x83, 0xc0, 0xff],
        &[0xb8, 0xff, 0xff, 0xff, 0xff],
        &[0x80, 0x70, 0xfb, 0x20],
        &[0xc6, 0x45, 0xf8, 0x63],
        &[0x89, 0x14, 0x88],
        &[0x88, 0x04, 0x33],
        &[0xc1, 0xc8, 0x0d],
        &[0xd1, 0xe0],
        &[0xd3, 0xe8],
        &[0x91],
        &[0x86, 0x08],
        &[0xa3, 0x2c, 0x00, 0x00, 0x00],
        &[0x66, 0xa1, 0x2c, 0x00, 0x00, 0x00],
        &[0xeb, 0xfe],
        &[0x75, 0xfc],
        &[0xf7, 0xc0, 0x44, 0x33, 0x22, 0x11],
        &[0xf7, 0xd8],
        &[0xf6, 0xd0],
        &[0xf7, 0xe1],
        &[0x50],
        &[0x58],
        &[0x8f, 0x00],
        &[0xfe, 0x08],
        &[0x40],
        &[0x4b],
        &[0x66, 0x40],
        &[0xff, 0x30],
        &[0xff, 0x20],
        &[0xff, 0xd0],
        &[0xe8, 0x10, 0x00, 0x00, 0x00],
        &[0xe9, 0x00, 0x01, 0x00, 0x00],
        &[0x0f, 0x8f, 0x00, 0x01, 0x00, 0x00],
        &[0x0f, 0x1f, 0x40, 0x00],
        &[0x89, 0x45, 0x00],
        &[0x8b, 0x04, 0x8d, 0x10, 0x00, 0x00, 0x00],
        &[0x8b, 0x04, 0x8d, 0x00, 0x00, 0x00, 0x00],
        &[0x8b, 0x44, 0x24, 0x08],
        &[0x65, 0x8b, 0x0d, 0x30, 0x00, 0x00, 0x00],
        &[0x66, 0xb8, 0x34, 0x12],
        &[0x66, 0x68, 0x34, 0x12],
        &[0x66, 0x50],
        &[0xa8, 0x80],
        &[0x84, 0xc9],
        &[0x30, 0xc0],
        &[0x31, 0xdb],
        &[0x21, 0x45, 0xfc],
        &[0x09, 0x0c, 0x95, 0x44, 0x33, 0x22, 0x11],
        &[0x3d, 0x00, 0x00, 0x00, 0x80],
        &[0x81, 0x7d, 0x0c, 0x01, 0x00, 0x00, 0x00],
        &[0x83, 0x7d, 0x0c, 0x01],
    ];
    for p in pins32 {
        assert!(emit(32, p), "pin rejected (x86): {}", hex(p));
    }

    let pins64: &[&[u8]] = &[
        &[0x83, 0xec, 0x20],
        &[0xff, 0xd0],
        &[0x48, 0x83, 0xc4, 0x20],
        &[0x5d],
        &[0xc3],
        &[0x55],
        &[0x48, 0x89, 0xe5],
        &[0x48, 0x89, 0x4d, 0x10],
        &[0x83, 0x7d, 0x18, 0x01],
        &[0xc7, 0x05, 0x6a, 0xab, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00],
        &[0x48, 0x8d, 0x05, 0x66, 0xb7, 0x00, 0x00],
        &[0x48, 0x8d, 0x05, 0xfe, 0xff, 0xff, 0xff],
        &[0x48, 0xb8, 0xf0, 0xde, 0xbc, 0x9a, 0x78, 0x56, 0x34, 0x12],
        &[0x65, 0x48, 0x8b, 0x04, 0x25, 0x60, 0x00, 0x00, 0x00],
        &[0x4d, 0x89, 0x44, 0xcd, 0x08],
        &[0xff, 0x25, 0x10, 0x20, 0x00, 0x00],
        &[0xff, 0x14, 0x25, 0x98, 0x20, 0x40, 0x00],
        &[0xff, 0x14, 0x25, 0xf0, 0xff, 0xff, 0xff],
        &[0x41, 0x5f],
        &[0x41, 0x50],
        &[0x66, 0xb8, 0x34, 0x12],
        &[0xa1, 0x88, 0x77, 0x66, 0x55, 0x44, 0x33, 0x22, 0x11],
        &[0xa3, 0x88, 0x77, 0x66, 0x55, 0x44, 0x33, 0x22, 0x11],
        &[0x41, 0x90],
        &[0x48, 0x90],
        &[0x49, 0x93],
        &[0x48, 0x31, 0xc0],
        &[0x48, 0x83, 0xc0, 0xfe],
        &[0x49, 0x8b, 0x45, 0x00],
        &[0x4b, 0x8b, 0x44, 0xe1, 0x08],
        &[0x42, 0x8b, 0x04, 0xa5, 0x10, 0x00, 0x00, 0x00],
        &[0x6a, 0xdb],
        &[0x68, 0xdb, 0xff, 0xff, 0xff],
        &[0x40, 0x88, 0x74, 0x24, 0x20],
        &[0x44, 0x30, 0xe9],
        &[0x0f, 0x1f, 0x84, 0x00, 0x00, 0x00, 0x00, 0x00],
        &[0x66, 0x0f, 0x1f, 0x44, 0x00, 0x00],
        &[0x49, 0xc1, 0xe2, 0x04],
        &[0x49, 0xff, 0xc8],
        &[0x48, 0xff, 0x30],
        &[0xeb, 0x00],
        &[0xcc],
        &[0x90],
        &[0x66, 0x90],
    ];
    for p in pins64 {
        assert!(emit(64, p), "pin rejected (x64): {}", hex(p));
    }

    // Randomized draws per template family until the corpus is large enough.
    let alu_bases: &[u8] = &[0x00, 0x08, 0x10, 0x18, 0x20, 0x28, 0x30, 0x38];
    let mut drawn = 0usize;
    while drawn < 520 {
        let x64 = rng.below(2) == 1;
        let arch: u32 = if x64 { 64 } else { 32 };
        let mut bytes: Vec<u8> = Vec::new();

        // optional prefixes
        let mut prefix_budget = rng.below(3);
        let use_66 = prefix_budget > 0 && rng.below(4) == 0;
        if use_66 {
            bytes.push(0x66);
            prefix_budget -= 1;
        }
        if prefix_budget > 0 && rng.below(5) == 0 {
            bytes.push(*rng.pick(&[0x64u8, 0x65]));
        }
        let mut rex: u8 = 0;
        if x64 && rng.below(2) == 0 {
            rex = 0x40 | (rng.below(16) as u8);
            bytes.push(rex);
        }

        let family = rng.below(16);
        match family {
            0 => {
                // ALU rm/reg forms
                let base = *rng.pick(alu_bases);
                let form = rng.below(4) as u8;
                bytes.push(base + form);
                bytes.extend(modrm_bytes(&mut rng, x64, rng.byte() & 7, true));
            }
            1 => {
                // ALU accumulator-immediate
                let base = *rng.pick(alu_bases);
                if rng.below(2) == 0 {
                    bytes.push(base + 4);
                    bytes.push(rng.byte());
                } else {
                    bytes.push(base + 5);
                    let n = if use_66 { 2 } else { 4 };
                    for _ in 0..n {
                        bytes.push(rng.byte());
                    }
                }
            }
            2 => {
                // group-1 immediates
                let opc = *rng.pick(&[0x80u8, 0x81, 0x83]);
                bytes.push(opc);
                bytes.extend(modrm_bytes(&mut rng, x64, rng.byte() & 7, true));
                let n = match opc {
                    0x81 => {
                        if use_66 {
                            2
                        } else {
                            4
                        }
                    }
                    _ => 1,
                };
                for _ in 0..n {
                    bytes.push(rng.byte());
                }
            }
            3 => {
                // mov rm/reg
                bytes.push(*rng.pick(&[0x88u8, 0x89, 0x8a, 0x8b]));
                bytes.extend(modrm_bytes(&mut rng, x64, rng.byte() & 7, true));
            }
            4 => {
                // mov immediate
                match rng.below(3) {
                    0 => {
                        bytes.push(0xb0 + (rng.below(8) as u8));
                        bytes.push(rng.byte());
                    }
                    1 => {
                        bytes.push(0xb8 + (rng.below(8) as u8));
                        let n = if use_66 { 2 } else if rex & 8 != 0 { 8 } else { 4 };
                        for _ in 0..n {
                            bytes.push(rng.byte());
                        }
                    }
                    _ => {
                        let opc = *rng.pick(&[0xc6u8, 0xc7]);
                        bytes.push(opc);
                        bytes.extend(modrm_bytes(&mut rng, x64, 0, true));
                        let n = if opc == 0xc6 { 1 } else if use_66 { 2 } else { 4 };
                        for _ in 0..n {
                            bytes.push(rng.byte());
                        }
                    }
                }
            }
            5 => {
                // push/pop
                match rng.below(5) {
                    0 => bytes.push(0x50 + (rng.below(8) as u8)),
                    1 => bytes.push(0x58 + (rng.below(8) as u8)),
                    2 => {
                        bytes.push(0x6a);
                        bytes.push(rng.byte());
                    }
                    3 => {
                        bytes.push(0x68);
                        let n = if use_66 { 2 } else { 4 };
                        for _ in 0..n {
                            bytes.push(rng.byte());
                        }
                    }
                    _ => {
                        bytes.push(0x8f);
                        bytes.extend(modrm_bytes(&mut rng, x64, 0, false));
                    }
                }
            }
            6 => {
                // call/jmp via 0xff group
                bytes.push(0xff);
                let sel = *rng.pick(&[0u8, 1, 2, 4, 6]);
                bytes.extend(modrm_bytes(&mut rng, x64, sel, true));
            }
            7 => {
                // relative branches
                match rng.below(4) {
                    0 => {
                        bytes.push(0xe8);
                        for _ in 0..4 {
                            bytes.push(rng.byte());
                        }
                    }
                    1 => {
                        bytes.push(0xe9);
                        for _ in 0..4 {
                            bytes.push(rng.byte());
                        }
                    }
                    2 => {
                        bytes.push(0xeb);
                        bytes.push(rng.byte());
                    }
                    _ => {
                        bytes.push(0x70 + (rng.below(16) as u8));
                        bytes.push(rng.byte());
                    }
                }
                if use_66 {
                    continue; // 16-bit branches stay outside the subset
                }
            }
            8 => {
                // long conditional branches
                bytes.push(0x0f);
                bytes.push(0x80 + (rng.below(16) as u8));
                for _ in 0..4 {
                    bytes.push(rng.byte());
                }
                if use_66 {
                    continue;
                }
            }
            9 => {
                // shifts and rotates
                let opc = *rng.pick(&[0xc0u8, 0xc1, 0xd0, 0xd1, 0xd2, 0xd3]);
                bytes.push(opc);
                let sel = *rng.pick(&[0u8, 1, 2, 3, 4, 5, 7]);
                bytes.extend(modrm_bytes(&mut rng, x64, sel, true));
                if opc == 0xc0 || opc == 0xc1 {
                    bytes.push(rng.byte());
                }
            }
            10 => {
                // test / group-3
                match rng.below(4) {
                    0 => {
                        bytes.push(*rng.pick(&[0x84u8, 0x85]));
                        bytes.extend(modrm_bytes(&mut rng, x64, rng.byte() & 7, true));
                    }
                    1 => {
                        bytes.push(0xa8);
                        bytes.push(rng.byte());
                    }
                    2 => {
                        bytes.push(0xa9);
                        let n = if use_66 { 2 } else { 4 };
                        for _ in 0..n {
                            bytes.push(rng.byte());
                        }
                    }
                    _ => {
                        let opc = *rng.pick(&[0xf6u8, 0xf7]);
                        bytes.push(opc);
                        let sel = *rng.pick(&[0u8, 2, 3, 4, 5, 6, 7]);
                        bytes.extend(modrm_bytes(&mut rng, x64, sel, true));
                        if sel == 0 {
                            let n = if opc == 0xf6 { 1 } else if use_66 { 2 } else { 4 };
                            for _ in 0..n {
                                bytes.push(rng.byte());
                            }
                        }
                    }
                }
            }
            11 => {
                // xchg
                if rng.below(2) == 0 {
                    bytes.push(*rng.pick(&[0x86u8, 0x87]));
                    bytes.extend(modrm_bytes(&mut rng, x64, rng.byte() & 7, true));
                } else {
                    bytes.push(0x91 + (rng.below(7) as u8));
                }
            }
            12 => {
                // inc/dec
                if !x64 && rng.below(2) == 0 {
                    bytes.push(0x40 + (rng.below(16) as u8));
                } else {
                    bytes.push(0xfe);
                    bytes.extend(modrm_bytes(&mut rng, x64, rng.below(2) as u8, true));
                }
            }
            13 => {
                // lea
                bytes.push(0x8d);
                bytes.extend(modrm_bytes(&mut rng, x64, rng.byte() & 7, false));
            }
            14 => {
                // moffs forms
                bytes.push(0xa0 + (rng.below(4) as u8));
                let n = if x64 { 8 } else { 4 };
                for _ in 0..n {
                    bytes.push(rng.byte());
                }
            }
            _ => {
                // nop family / ret / int3
                match rng.below(4) {
                    0 => bytes.push(0x90),
                    1 => {
                        bytes.push(0x0f);
                        bytes.push(0x1f);
                        bytes.extend(modrm_bytes(&mut rng, x64, 0, false));
                    }
                    2 => {
                        bytes.push(0xc2);
                        bytes.push(rng.byte());
                        bytes.push(rng.byte());
                    }
                    _ => bytes.push(*rng.pick(&[0xc3u8, 0xcc])),
                }
            }
        }

        if emit(arch, &bytes) {
            drawn += 1;
        }
    }

    std::fs::write(path, lines.join("\n") + "\n").unwrap();
    eprintln!("decoder golden: {} entries", lines.len() - 1);
}

const RULES_TEXT: &str = r#"
// rule-engine fixture set
rule plain_text { strings: $a = "GetProcAddress" condition: any of them }
rule nocase_text { strings: $a = "kernel32.dll" nocase condition: any of them }
rule hex_exact { strings: $a = { 64 a1 2c 00 00 00 } condition: any of them }
rule hex_wild { strings: $a = { 68 ?? 21 40 00 } condition: any of them }
rule hex_wild_edges { strings: $a = { ?? 15 98 20 ?? 00 } condition: $a }
rule two_any { strings: $a = "cmd.exe" $b = { ff d0 } condition: any of them }
rule two_all { strings: $a = "cmd.exe" $b = { ff d0 } condition: all of them }
rule and_pair { strings: $a = { 6a 00 } $b = { c2 0c 00 } condition: $a and $b }
rule or_pair { strings: $a = "powershell" $b = "rundll32" condition: $a or $b }
rule not_mix { strings: $a = { cc cc cc cc } $b = "DEBUG" condition: $a and not $b }
rule parens { strings: $a = "http://" $b = "https://" $c = { 90 90 90 } condition: ($a or $b) and $c }
rule nested_not { strings: $a = { 00 00 00 00 } $b = "MZ" condition: not ($a and not $b) }
rule single_byte { strings: $a = { cc } condition: any of them }
rule long_text { strings: $a = "This program cannot be run in DOS mode" condition: any of them }
rule wild_run { strings: $a = { c7 40 ?? ?? 02 00 00 } condition: any of them }
rule mixed_kinds { strings: $a = "VirtualAlloc" $b = { 64 a1 ?? 00 00 00 } condition: $a or $b }
rule all_three { strings: $a = { 6a 00 } $b = { 68 } $c = { c3 } condition: all of them }
rule caseless_upper { strings: $a = "EXITPROCESS" nocase condition: any of them }
rule tail_anchor { strings: $a = { 40 00 8b 00 } condition: any of them }
rule deep_boolean { strings: $a = { 90 } $b = "MZ" $c = "PE" condition: ($a and $b) or ($b and $c) or not ($a or $b or $c) }
"#;

fn rule_buffers() -> Vec<Vec<u8>> {
    let classic: Vec<u8> = vec![
        0x64, 0xa1, 0x2c, 0x00, 0x00, 0x00, 0x6a, 0x00, 0x68, 0x10, 0x21, 0x40, 0x00, 0x68,
        0x10, 0x21, 0x40, 0x00, 0x8b, 0x00, 0x6a, 0x00, 0xc7, 0x40, 0x04, 0x1f, 0x02, 0x00,
        0x00, 0xff, 0x15, 0x98, 0x20, 0x40, 0x00, 0xc2, 0x0c, 0x00, 0xcc, 0xcc, 0xcc, 0xcc,
    ];
    let mut rng = Lcg(0x5eed_f1x7_u64 ^ 0xabcdef);
    let mut random_with = |extra: &[u8], len: usize, pos: usize| -> Vec<u8> {
        let mut v: Vec<u8> = (0..len).map(|_| rng.byte()).collect();
        v[pos..pos + extra.len()].copy_from_slice(extra);
        v
    };
    vec![
        classic.clone(),
        b"GetProcAddress resolved via KERNEL32.DLL".to_vec(),
        b"loading kernel32.dll and user32.dll".to_vec(),
        b"cmd.exe /c whoami".to_vec(),
        vec![0xff, 0xd0, 0x90, 0x90, 0x90, 0xcc],
        b"MZ\x90\x00This program cannot be run in DOS mode".to_vec(),
        vec![0x00; 64],
        vec![0xcc; 8],
        b"https://example.invalid/payload\x90\x90\x90".to_vec(),
        b"rundll32 shell32.dll".to_vec(),
        random_with(&[0x68, 0x44, 0x21, 0x40, 0x00], 48, 10),
        random_with(&[0xc7, 0x40, 0x08, 0x55, 0x02, 0x00, 0x00], 32, 3),
        b"EXITPROCESS exitprocess ExitProcess".to_vec(),
        b"powershell -enc AAAA".to_vec(),
        vec![0x6a, 0x00, 0x68, 0x99, 0x99, 0x99, 0x99, 0xc3],
        b"MZPE\x00\x00\x90".to_vec(),
        random_with(&[0x40, 0x00, 0x8b, 0x00], 24, 20),
        b"DEBUG build \xcc\xcc\xcc\xcc".to_vec(),
        vec![0x90, 0x90],
        classic[6..].to_vec(),
    ]
}

fn gen_rules_golden(dir: &Path) {
    std::fs::write(dir.join("rules_fixture.yar"), RULES_TEXT.trim_start()).unwrap();

    let buffers = rule_buffers();
    let mut buf_lines = String::new();
    for b in &buffers {
        writeln!(buf_lines, "{}", hex(b)).unwrap();
    }
    std::fs::write(dir.join("rules_buffers.txt"), buf_lines).unwrap();

    let rules = yara_x::compile(RULES_TEXT).expect("reference engine rejected the rule set");
    let mut golden = String::new();
    golden.push_str("# rule|buffer_index|matched\n");
    for (bi, buf) in buffers.iter().enumerate() {
        let mut scanner = yara_x::Scanner::new(&rules);
        let results = scanner.scan(buf).unwrap();
        let matched: Vec<String> = results
            .matching_rules()
            .map(|r| r.identifier().to_string())
            .collect();
        for line in RULES_TEXT.lines() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("rule ") {
                let name = rest.split_whitespace().next().unwrap();
                writeln!(golden, "{}|{}|{}", name, bi, if matched.iter().any(|m| m == name) { 1 } else { 0 })
                    .unwrap();
            }
        }
    }
    std::fs::write(dir.join("rules_golden.txt"), golden).unwrap();
    eprintln!("rules golden: {} buffers x 20 rules", buffers.len());
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dir = Path::new(args.get(1).map(String::as_str).unwrap_or(".."));
    gen_decoder_golden(&dir.join("decoder_golden.txt"));
    gen_rules_golden(dir);
}
