//! Two-pass assembler for the RV32I subset.
//!
//! Syntax is the usual RV32I form: `add x1, x2, x3`, loads and stores as
//! `lw x1, 16(x2)`, branch and jump targets as a label, a pc-relative
//! `.+8` / `.-8`, or a bare byte offset. Registers are `x0`..`x31`.
//! Comments start with `#` or `//`. Directives: `.org ADDR` moves the
//! location counter forward (the gap is zero-filled) and `.word V, ...`
//! emits literal words or label addresses. The only pseudo-instruction is
//! `nop`.

mod disasm;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::image::MemImage;
use crate::isa::{encode, Format, Instruction, IsaError, Mnemonic};

pub use disasm::{disassemble, disassemble_image};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AsmErrorKind {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("immediate {value} out of range for {what}")]
    ImmediateRange { value: i64, what: String },
    #[error("branch offset {offset} out of range for {mnemonic}")]
    BranchOutOfRange { offset: i64, mnemonic: String },
    #[error("expected {expected} operand(s), found {found}")]
    OperandCount { expected: usize, found: usize },
    #[error("expected a register x0..x31, found `{0}`")]
    BadRegister(String),
    #[error("malformed operand `{0}`")]
    BadOperand(String),
    #[error("`.org {0:#x}` is not word-aligned")]
    MisalignedOrg(u32),
    #[error("`.org {0:#x}` is behind the current location {1:#x}")]
    OrgBackwards(u32, u32),
    #[error("origin {0:#x} is not word-aligned")]
    MisalignedOrigin(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct AsmError {
    pub line: usize,
    pub column: usize,
    pub kind: AsmErrorKind,
}

/// All diagnostics from one assembly, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct AsmErrors(pub Vec<AsmError>);

impl fmt::Display for AsmErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operand {
    pub text: String,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Instr(Mnemonic),
    Nop,
    Org,
    Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub op: Op,
    pub column: usize,
    pub operands: Vec<Operand>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLine {
    pub line: usize,
    pub labels: Vec<(String, usize)>,
    pub statement: Option<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceProgram {
    pub lines: Vec<SourceLine>,
}

pub type SymbolTable = HashMap<String, u32>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembly {
    pub image: MemImage,
    pub symbols: SymbolTable,
}

fn strip_comment(line: &str) -> &str {
    let cut = [line.find('#'), line.find("//")]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(line.len());
    &line[..cut]
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '.')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn err(line: usize, column: usize, kind: AsmErrorKind) -> AsmError {
    AsmError { line, column, kind }
}

/// Splits source text into labelled statements.
pub fn parse(src: &str) -> Result<SourceProgram, AsmErrors> {
    let mut lines = Vec::new();
    let mut errors = Vec::new();

    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let body = strip_comment(raw);
        let mut rest = body;
        let mut offset = 0;
        let mut labels = Vec::new();

        // leading `label:` prefixes
        loop {
            let trimmed = rest.trim_start();
            offset += rest.len() - trimmed.len();
            rest = trimmed;
            match rest.find(':') {
                Some(p) if is_ident(rest[..p].trim_end()) => {
                    labels.push((rest[..p].trim_end().to_string(), offset + 1));
                    offset += p + 1;
                    rest = &rest[p + 1..];
                }
                _ => break,
            }
        }

        let rest_trim = rest.trim_end();
        if rest_trim.is_empty() {
            if !labels.is_empty() {
                lines.push(SourceLine {
                    line,
                    labels,
                    statement: None,
                });
            }
            continue;
        }

        let column = offset + 1;
        let (word, args) = match rest_trim.find(char::is_whitespace) {
            Some(p) => (&rest_trim[..p], &rest_trim[p..]),
            None => (rest_trim, ""),
        };
        let lower = word.to_ascii_lowercase();
        let op = match lower.as_str() {
            "nop" => Op::Nop,
            ".org" => Op::Org,
            ".word" => Op::Word,
            other => match other.parse::<Mnemonic>() {
                Ok(m) => Op::Instr(m),
                Err(()) => {
                    errors.push(err(line, column, AsmErrorKind::UnknownMnemonic(word.into())));
                    continue;
                }
            },
        };

        let mut operands = Vec::new();
        let args_start = offset + word.len();
        if !args.trim().is_empty() {
            let mut pos = 0;
            for piece in args.split(',') {
                let lead = piece.len() - piece.trim_start().len();
                operands.push(Operand {
                    text: piece.trim().to_string(),
                    column: args_start + pos + lead + 1,
                });
                pos += piece.len() + 1;
            }
        }

        lines.push(SourceLine {
            line,
            labels,
            statement: Some(Statement {
                op,
                column,
                operands,
            }),
        });
    }

    if errors.is_empty() {
        Ok(SourceProgram { lines })
    } else {
        Err(AsmErrors(errors))
    }
}

pub fn parse_int(text: &str) -> Option<i64> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (digits, radix) = if let Some(h) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        (h, 16)
    } else if let Some(b) = body.strip_prefix("0b").or_else(|| body.strip_prefix("0B")) {
        (b, 2)
    } else {
        (body, 10)
    };
    // from_str_radix would also take a sign here; only bare digits are valid
    if digits.is_empty() || !digits.chars().all(|c| c.is_digit(radix)) {
        return None;
    }
    let v = i64::from_str_radix(digits, radix).ok()?;
    if v > u32::MAX as i64 {
        return None;
    }
    Some(if neg { -v } else { v })
}

fn parse_reg(op: &Operand, line: usize) -> Result<u8, AsmError> {
    op.text
        .strip_prefix('x')
        .filter(|n| !n.is_empty() && n.bytes().all(|c| c.is_ascii_digit()) && n.len() <= 2)
        .and_then(|n| n.parse::<u8>().ok())
        .filter(|&r| r < 32)
        .ok_or_else(|| err(line, op.column, AsmErrorKind::BadRegister(op.text.clone())))
}

fn parse_imm(op: &Operand, line: usize) -> Result<i64, AsmError> {
    parse_int(&op.text).ok_or_else(|| err(line, op.column, AsmErrorKind::BadOperand(op.text.clone())))
}

/// `imm(xN)` with an optional immediate.
fn parse_mem(op: &Operand, line: usize) -> Result<(i64, u8), AsmError> {
    let bad = || err(line, op.column, AsmErrorKind::BadOperand(op.text.clone()));
    let open = op.text.find('(').ok_or_else(bad)?;
    let close = op.text.strip_suffix(')').ok_or_else(bad)?;
    let imm_text = op.text[..open].trim();
    let imm = if imm_text.is_empty() {
        0
    } else {
        parse_int(imm_text).ok_or_else(bad)?
    };
    let reg = Operand {
        text: close[open + 1..].trim().to_string(),
        column: op.column + open + 1,
    };
    Ok((imm, parse_reg(&reg, line)?))
}

fn expect_count(stmt: &Statement, n: usize, line: usize) -> Result<(), AsmError> {
    if stmt.operands.len() != n {
        return Err(err(
            line,
            stmt.column,
            AsmErrorKind::OperandCount {
                expected: n,
                found: stmt.operands.len(),
            },
        ));
    }
    Ok(())
}

fn resolve_value(op: &Operand, line: usize, symbols: &SymbolTable) -> Result<i64, AsmError> {
    if let Some(v) = parse_int(&op.text) {
        return Ok(v);
    }
    if is_ident(&op.text) {
        return symbols
            .get(&op.text)
            .map(|&a| a as i64)
            .ok_or_else(|| err(line, op.column, AsmErrorKind::UndefinedLabel(op.text.clone())));
    }
    Err(err(line, op.column, AsmErrorKind::BadOperand(op.text.clone())))
}

/// Branch/jump target as a byte offset from `pc`.
fn resolve_target(op: &Operand, line: usize, pc: u32, symbols: &SymbolTable) -> Result<i64, AsmError> {
    let t = op.text.as_str();
    if t == "." {
        return Ok(0);
    }
    if let Some(rel) = t.strip_prefix('.') {
        if rel.starts_with('+') || rel.starts_with('-') {
            return parse_int(rel)
                .ok_or_else(|| err(line, op.column, AsmErrorKind::BadOperand(t.into())));
        }
    }
    if let Some(v) = parse_int(t) {
        return Ok(v);
    }
    if is_ident(t) {
        return symbols
            .get(t)
            .map(|&a| a as i64 - pc as i64)
            .ok_or_else(|| err(line, op.column, AsmErrorKind::UndefinedLabel(t.into())));
    }
    Err(err(line, op.column, AsmErrorKind::BadOperand(t.into())))
}

fn fence_set(op: &Operand, line: usize) -> Result<i32, AsmError> {
    let bad = || err(line, op.column, AsmErrorKind::BadOperand(op.text.clone()));
    let mut bits = 0;
    for c in op.text.chars() {
        let bit = match c {
            'i' => 8,
            'o' => 4,
            'r' => 2,
            'w' => 1,
            _ => return Err(bad()),
        };
        if bits & bit != 0 {
            return Err(bad());
        }
        bits |= bit;
    }
    if bits == 0 {
        return Err(bad());
    }
    Ok(bits)
}

fn range_check(value: i64, lo: i64, hi: i64, what: &str, col: usize, line: usize) -> Result<i32, AsmError> {
    if value < lo || value > hi {
        return Err(err(
            line,
            col,
            AsmErrorKind::ImmediateRange {
                value,
                what: what.into(),
            },
        ));
    }
    Ok(value as i32)
}

fn build_instruction(
    m: Mnemonic,
    stmt: &Statement,
    line: usize,
    pc: u32,
    symbols: &SymbolTable,
) -> Result<Instruction, AsmError> {
    let ops = &stmt.operands;
    let name = m.name();
    let inst = match m.format() {
        Format::R => {
            expect_count(stmt, 3, line)?;
            Instruction::r(m, parse_reg(&ops[0], line)?, parse_reg(&ops[1], line)?, parse_reg(&ops[2], line)?)
        }
        Format::I if m.is_system() => {
            expect_count(stmt, 0, line)?;
            Instruction::i(m, 0, 0, 0)
        }
        Format::I if m == Mnemonic::Fence => {
            let imm = if ops.is_empty() {
                0xFF
            } else {
                expect_count(stmt, 2, line)?;
                (fence_set(&ops[0], line)? << 4) | fence_set(&ops[1], line)?
            };
            Instruction::i(m, 0, 0, imm)
        }
        Format::I if m.is_load() => {
            expect_count(stmt, 2, line)?;
            let rd = parse_reg(&ops[0], line)?;
            let (imm, rs1) = parse_mem(&ops[1], line)?;
            Instruction::i(m, rd, rs1, range_check(imm, -2048, 2047, name, ops[1].column, line)?)
        }
        Format::I if m == Mnemonic::Jalr => {
            if ops.len() != 3 {
                expect_count(stmt, 2, line)?;
            }
            let rd = parse_reg(&ops[0], line)?;
            let (imm, rs1, col) = if ops.len() == 2 {
                let (imm, rs1) = parse_mem(&ops[1], line)?;
                (imm, rs1, ops[1].column)
            } else {
                (parse_imm(&ops[2], line)?, parse_reg(&ops[1], line)?, ops[2].column)
            };
            Instruction::i(m, rd, rs1, range_check(imm, -2048, 2047, name, col, line)?)
        }
        Format::I => {
            expect_count(stmt, 3, line)?;
            let rd = parse_reg(&ops[0], line)?;
            let rs1 = parse_reg(&ops[1], line)?;
            let imm = parse_imm(&ops[2], line)?;
            let imm = if m.is_shift_imm() {
                range_check(imm, 0, 31, name, ops[2].column, line)?
            } else {
                range_check(imm, -2048, 2047, name, ops[2].column, line)?
            };
            Instruction::i(m, rd, rs1, imm)
        }
        Format::S => {
            expect_count(stmt, 2, line)?;
            let rs2 = parse_reg(&ops[0], line)?;
            let (imm, rs1) = parse_mem(&ops[1], line)?;
            Instruction::sb(m, rs1, rs2, range_check(imm, -2048, 2047, name, ops[1].column, line)?)
        }
        Format::B => {
            expect_count(stmt, 3, line)?;
            let rs1 = parse_reg(&ops[0], line)?;
            let rs2 = parse_reg(&ops[1], line)?;
            let off = resolve_target(&ops[2], line, pc, symbols)?;
            if !(-4096..=4094).contains(&off) || off & 1 != 0 {
                return Err(err(
                    line,
                    ops[2].column,
                    AsmErrorKind::BranchOutOfRange {
                        offset: off,
                        mnemonic: name.into(),
                    },
                ));
            }
            Instruction::sb(m, rs1, rs2, off as i32)
        }
        Format::U => {
            expect_count(stmt, 2, line)?;
            let rd = parse_reg(&ops[0], line)?;
            let v = parse_imm(&ops[1], line)?;
            let v = range_check(v, -(1 << 19), 0xF_FFFF, name, ops[1].column, line)?;
            Instruction::uj(m, rd, ((v as u32 & 0xF_FFFF) << 12) as i32)
        }
        Format::J => {
            expect_count(stmt, 2, line)?;
            let rd = parse_reg(&ops[0], line)?;
            let off = resolve_target(&ops[1], line, pc, symbols)?;
            if !(-(1 << 20)..(1 << 20)).contains(&off) || off & 1 != 0 {
                return Err(err(
                    line,
                    ops[1].column,
                    AsmErrorKind::BranchOutOfRange {
                        offset: off,
                        mnemonic: name.into(),
                    },
                ));
            }
            Instruction::uj(m, rd, off as i32)
        }
    };
    Ok(inst)
}

/// Pass 1: assign an address to every statement and collect labels.
fn layout(
    program: &SourceProgram,
    origin: u32,
    errors: &mut Vec<AsmError>,
) -> (Vec<Option<u32>>, SymbolTable) {
    let mut symbols = SymbolTable::new();
    let mut addrs = Vec::with_capacity(program.lines.len());
    let mut loc = origin as u64;

    for sl in &program.lines {
        // `.org` moves the counter before its own labels bind
        if let Some(stmt) = &sl.statement {
            if stmt.op == Op::Org {
                match stmt.operands.as_slice() {
                    [op] => match parse_int(&op.text) {
                        Some(v) if (0..=u32::MAX as i64).contains(&v) => {
                            let v = v as u32;
                            if v & 3 != 0 {
                                errors.push(err(sl.line, op.column, AsmErrorKind::MisalignedOrg(v)));
                            } else if (v as u64) < loc {
                                errors.push(err(sl.line, op.column, AsmErrorKind::OrgBackwards(v, loc as u32)));
                            } else {
                                loc = v as u64;
                            }
                        }
                        _ => errors.push(err(sl.line, op.column, AsmErrorKind::BadOperand(op.text.clone()))),
                    },
                    _ => errors.push(err(
                        sl.line,
                        stmt.column,
                        AsmErrorKind::OperandCount {
                            expected: 1,
                            found: stmt.operands.len(),
                        },
                    )),
                }
            }
        }
        for (name, col) in &sl.labels {
            if symbols.insert(name.clone(), loc as u32).is_some() {
                errors.push(err(sl.line, *col, AsmErrorKind::DuplicateLabel(name.clone())));
            }
        }
        match &sl.statement {
            Some(stmt) if stmt.op != Op::Org => {
                addrs.push(Some(loc as u32));
                let size = match stmt.op {
                    Op::Word => 4 * stmt.operands.len().max(1) as u64,
                    _ => 4,
                };
                loc += size;
            }
            _ => addrs.push(None),
        }
    }
    (addrs, symbols)
}

pub fn assemble_program(program: &SourceProgram, origin: u32) -> Result<Assembly, AsmErrors> {
    if origin & 3 != 0 {
        return Err(AsmErrors(vec![err(0, 0, AsmErrorKind::MisalignedOrigin(origin))]));
    }
    let mut errors = Vec::new();
    let (addrs, symbols) = layout(program, origin, &mut errors);

    let mut words: Vec<u32> = Vec::new();
    let mut put = |addr: u32, w: u32| {
        let index = ((addr - origin) / 4) as usize;
        if words.len() <= index {
            words.resize(index + 1, 0);
        }
        words[index] = w;
    };

    for (sl, addr) in program.lines.iter().zip(&addrs) {
        let (Some(stmt), Some(addr)) = (&sl.statement, *addr) else {
            continue;
        };
        let line = sl.line;
        let result: Result<(), AsmError> = (|| {
            match &stmt.op {
                Op::Org => {}
                Op::Word => {
                    if stmt.operands.is_empty() {
                        return expect_count(stmt, 1, line);
                    }
                    for (k, op) in stmt.operands.iter().enumerate() {
                        let v = resolve_value(op, line, &symbols)?;
                        let v = range_check(v, i32::MIN as i64, u32::MAX as i64, ".word", op.column, line)?;
                        put(addr + 4 * k as u32, v as u32);
                    }
                }
                Op::Nop => {
                    expect_count(stmt, 0, line)?;
                    put(addr, encode(&Instruction::nop()).expect("nop encodes"));
                }
                Op::Instr(m) => {
                    let inst = build_instruction(*m, stmt, line, addr, &symbols)?;
                    let w = encode(&inst).map_err(|e| {
                        let kind = match e {
                            IsaError::ImmediateRange { imm, mnemonic } => AsmErrorKind::ImmediateRange {
                                value: imm as i64,
                                what: mnemonic.name().into(),
                            },
                            other => AsmErrorKind::BadOperand(other.to_string()),
                        };
                        err(line, stmt.column, kind)
                    })?;
                    put(addr, w);
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            errors.push(e);
        }
    }

    if errors.is_empty() {
        Ok(Assembly {
            image: MemImage::new(origin, words),
            symbols,
        })
    } else {
        errors.sort_by_key(|e| (e.line, e.column));
        Err(AsmErrors(errors))
    }
}

/// Assembles source text into a memory image starting at `origin`.
pub fn assemble(src: &str, origin: u32) -> Result<MemImage, AsmErrors> {
    let program = parse(src)?;
    assemble_program(&program, origin).map(|a| a.image)
}
