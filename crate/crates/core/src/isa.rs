//! RV32I instruction definitions, binary encoding and decoding.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::bits::{extract_field, sign_extend, BitVec};

/// Instruction formats with their immediate layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    R,
    I,
    S,
    B,
    U,
    J,
}

macro_rules! mnemonics {
    ($($variant:ident => $name:literal, $fmt:ident, $opcode:literal, $f3:expr, $f7:expr;)*) => {
        /// The 40 RV32I base mnemonics.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Mnemonic {
            $($variant,)*
        }

        impl Mnemonic {
            pub const ALL: [Mnemonic; 40] = [$(Mnemonic::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Mnemonic::$variant => $name,)*
                }
            }

            pub fn format(self) -> Format {
                match self {
                    $(Mnemonic::$variant => Format::$fmt,)*
                }
            }

            /// Major opcode (bits 6..0).
            pub fn opcode(self) -> u32 {
                match self {
                    $(Mnemonic::$variant => $opcode,)*
                }
            }

            pub fn funct3(self) -> Option<u32> {
                match self {
                    $(Mnemonic::$variant => $f3,)*
                }
            }

            /// funct7 for R-type and shift-immediate instructions.
            pub fn funct7(self) -> Option<u32> {
                match self {
                    $(Mnemonic::$variant => $f7,)*
                }
            }
        }

        impl FromStr for Mnemonic {
            type Err = ();
            fn from_str(s: &str) -> Result<Self, ()> {
                match s {
                    $($name => Ok(Mnemonic::$variant),)*
                    _ => Err(()),
                }
            }
        }
    };
}

pub const OP_LOAD: u32 = 0x03;
pub const OP_MISC_MEM: u32 = 0x0F;
pub const OP_IMM: u32 = 0x13;
pub const OP_AUIPC: u32 = 0x17;
pub const OP_STORE: u32 = 0x23;
pub const OP_REG: u32 = 0x33;
pub const OP_LUI: u32 = 0x37;
pub const OP_BRANCH: u32 = 0x63;
pub const OP_JALR: u32 = 0x67;
pub const OP_JAL: u32 = 0x6F;
pub const OP_SYSTEM: u32 = 0x73;

mnemonics! {
    Add   => "add",   R, 0x33, Some(0), Some(0x00);
    Sub   => "sub",   R, 0x33, Some(0), Some(0x20);
    Sll   => "sll",   R, 0x33, Some(1), Some(0x00);
    Slt   => "slt",   R, 0x33, Some(2), Some(0x00);
    Sltu  => "sltu",  R, 0x33, Some(3), Some(0x00);
    Xor   => "xor",   R, 0x33, Some(4), Some(0x00);
    Srl   => "srl",   R, 0x33, Some(5), Some(0x00);
    Sra   => "sra",   R, 0x33, Some(5), Some(0x20);
    Or    => "or",    R, 0x33, Some(6), Some(0x00);
    And   => "and",   R, 0x33, Some(7), Some(0x00);
    Addi  => "addi",  I, 0x13, Some(0), None;
    Slti  => "slti",  I, 0x13, Some(2), None;
    Sltiu => "sltiu", I, 0x13, Some(3), None;
    Xori  => "xori",  I, 0x13, Some(4), None;
    Ori   => "ori",   I, 0x13, Some(6), None;
    Andi  => "andi",  I, 0x13, Some(7), None;
    Slli  => "slli",  I, 0x13, Some(1), Some(0x00);
    Srli  => "srli",  I, 0x13, Some(5), Some(0x00);
    Srai  => "srai",  I, 0x13, Some(5), Some(0x20);
    Lui   => "lui",   U, 0x37, None, None;
    Auipc => "auipc", U, 0x17, None, None;
    Beq   => "beq",   B, 0x63, Some(0), None;
    Bne   => "bne",   B, 0x63, Some(1), None;
    Blt   => "blt",   B, 0x63, Some(4), None;
    Bge   => "bge",   B, 0x63, Some(5), None;
    Bltu  => "bltu",  B, 0x63, Some(6), None;
    Bgeu  => "bgeu",  B, 0x63, Some(7), None;
    Jal   => "jal",   J, 0x6F, None, None;
    Jalr  => "jalr",  I, 0x67, Some(0), None;
    Lb    => "lb",    I, 0x03, Some(0), None;
    Lh    => "lh",    I, 0x03, Some(1), None;
    Lw    => "lw",    I, 0x03, Some(2), None;
    Lbu   => "lbu",   I, 0x03, Some(4), None;
    Lhu   => "lhu",   I, 0x03, Some(5), None;
    Sb    => "sb",    S, 0x23, Some(0), None;
    Sh    => "sh",    S, 0x23, Some(1), None;
    Sw    => "sw",    S, 0x23, Some(2), None;
    Fence => "fence", I, 0x0F, Some(0), None;
    Ecall => "ecall", I, 0x73, Some(0), None;
    Ebreak => "ebreak", I, 0x73, Some(0), None;
}

impl Mnemonic {
    pub fn is_shift_imm(self) -> bool {
        matches!(self, Mnemonic::Slli | Mnemonic::Srli | Mnemonic::Srai)
    }

    pub fn is_load(self) -> bool {
        self.opcode() == OP_LOAD
    }

    pub fn is_store(self) -> bool {
        self.opcode() == OP_STORE
    }

    pub fn is_branch(self) -> bool {
        self.opcode() == OP_BRANCH
    }

    pub fn is_system(self) -> bool {
        matches!(self, Mnemonic::Ecall | Mnemonic::Ebreak)
    }

    /// Which register fields the instruction actually uses: `(rd, rs1, rs2)`.
    pub fn uses_fields(self) -> (bool, bool, bool) {
        match self.format() {
            _ if self.is_system() => (false, false, false),
            Format::R => (true, true, true),
            Format::I => (true, true, false),
            Format::S | Format::B => (false, true, true),
            Format::U | Format::J => (true, false, false),
        }
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn format_of(m: Mnemonic) -> Format {
    m.format()
}

/// A decoded instruction. Fields the format does not use are zero and
/// `imm` is fully sign-extended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub mnemonic: Mnemonic,
    pub rd: u8,
    pub rs1: u8,
    pub rs2: u8,
    pub imm: i32,
}

impl Instruction {
    pub fn new(mnemonic: Mnemonic, rd: u8, rs1: u8, rs2: u8, imm: i32) -> Self {
        Instruction {
            mnemonic,
            rd,
            rs1,
            rs2,
            imm,
        }
    }

    pub fn r(mnemonic: Mnemonic, rd: u8, rs1: u8, rs2: u8) -> Self {
        Self::new(mnemonic, rd, rs1, rs2, 0)
    }

    pub fn i(mnemonic: Mnemonic, rd: u8, rs1: u8, imm: i32) -> Self {
        Self::new(mnemonic, rd, rs1, 0, imm)
    }

    /// S and B formats.
    pub fn sb(mnemonic: Mnemonic, rs1: u8, rs2: u8, imm: i32) -> Self {
        Self::new(mnemonic, 0, rs1, rs2, imm)
    }

    /// U and J formats.
    pub fn uj(mnemonic: Mnemonic, rd: u8, imm: i32) -> Self {
        Self::new(mnemonic, rd, 0, 0, imm)
    }

    pub fn nop() -> Self {
        Self::i(Mnemonic::Addi, 0, 0, 0)
    }

    pub fn format(&self) -> Format {
        self.mnemonic.format()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("illegal instruction {0:#010x}")]
    IllegalInstruction(u32),
    #[error("immediate {imm} out of range for {mnemonic}")]
    ImmediateRange { mnemonic: Mnemonic, imm: i32 },
    #[error("{field} field value {value} out of range for {mnemonic}")]
    FieldRange {
        mnemonic: Mnemonic,
        field: &'static str,
        value: u32,
    },
}

fn field(w: u32, hi: u32, lo: u32) -> u32 {
    // Bounds are compile-time constants below; they are always ordered.
    extract_field(w, hi, lo).map(BitVec::value).unwrap_or(0)
}

fn sext(value: u32, width: u32) -> i32 {
    let v = BitVec::truncating(width, value).expect("width in 1..=32");
    sign_extend(v, 32).expect("widening").value() as i32
}

fn imm_i(w: u32) -> i32 {
    sext(field(w, 31, 20), 12)
}

fn imm_s(w: u32) -> i32 {
    sext((field(w, 31, 25) << 5) | field(w, 11, 7), 12)
}

fn imm_b(w: u32) -> i32 {
    let raw = (field(w, 31, 31) << 12)
        | (field(w, 7, 7) << 11)
        | (field(w, 30, 25) << 5)
        | (field(w, 11, 8) << 1);
    sext(raw, 13)
}

fn imm_u(w: u32) -> i32 {
    (w & 0xFFFF_F000) as i32
}

fn imm_j(w: u32) -> i32 {
    let raw = (field(w, 31, 31) << 20)
        | (field(w, 19, 12) << 12)
        | (field(w, 20, 20) << 11)
        | (field(w, 30, 21) << 1);
    sext(raw, 21)
}

const ECALL_WORD: u32 = 0x0000_0073;
const EBREAK_WORD: u32 = 0x0010_0073;

fn lookup(opcode: u32, funct3: u32, funct7: u32) -> Option<Mnemonic> {
    use Mnemonic::*;
    let m = match (opcode, funct3) {
        (OP_REG, _) => match (funct3, funct7) {
            (0, 0x00) => Add,
            (0, 0x20) => Sub,
            (1, 0x00) => Sll,
            (2, 0x00) => Slt,
            (3, 0x00) => Sltu,
            (4, 0x00) => Xor,
            (5, 0x00) => Srl,
            (5, 0x20) => Sra,
            (6, 0x00) => Or,
            (7, 0x00) => And,
            _ => return None,
        },
        (OP_IMM, 0) => Addi,
        (OP_IMM, 2) => Slti,
        (OP_IMM, 3) => Sltiu,
        (OP_IMM, 4) => Xori,
        (OP_IMM, 6) => Ori,
        (OP_IMM, 7) => Andi,
        (OP_IMM, 1) if funct7 == 0 => Slli,
        (OP_IMM, 5) if funct7 == 0 => Srli,
        (OP_IMM, 5) if funct7 == 0x20 => Srai,
        (OP_LUI, _) => Lui,
        (OP_AUIPC, _) => Auipc,
        (OP_JAL, _) => Jal,
        (OP_JALR, 0) => Jalr,
        (OP_BRANCH, 0) => Beq,
        (OP_BRANCH, 1) => Bne,
        (OP_BRANCH, 4) => Blt,
        (OP_BRANCH, 5) => Bge,
        (OP_BRANCH, 6) => Bltu,
        (OP_BRANCH, 7) => Bgeu,
        (OP_LOAD, 0) => Lb,
        (OP_LOAD, 1) => Lh,
        (OP_LOAD, 2) => Lw,
        (OP_LOAD, 4) => Lbu,
        (OP_LOAD, 5) => Lhu,
        (OP_STORE, 0) => Sb,
        (OP_STORE, 1) => Sh,
        (OP_STORE, 2) => Sw,
        (OP_MISC_MEM, 0) => Fence,
        _ => return None,
    };
    Some(m)
}

/// Decodes a 32-bit instruction word.
pub fn decode(w: u32) -> Result<Instruction, IsaError> {
    let opcode = field(w, 6, 0);
    let rd = field(w, 11, 7) as u8;
    let funct3 = field(w, 14, 12);
    let rs1 = field(w, 19, 15) as u8;
    let rs2 = field(w, 24, 20) as u8;
    let funct7 = field(w, 31, 25);

    if opcode == OP_SYSTEM {
        return match w {
            ECALL_WORD => Ok(Instruction::i(Mnemonic::Ecall, 0, 0, 0)),
            EBREAK_WORD => Ok(Instruction::i(Mnemonic::Ebreak, 0, 0, 0)),
            _ => Err(IsaError::IllegalInstruction(w)),
        };
    }

    let m = lookup(opcode, funct3, funct7).ok_or(IsaError::IllegalInstruction(w))?;
    let inst = match m.format() {
        Format::R => Instruction::r(m, rd, rs1, rs2),
        Format::I if m.is_shift_imm() => Instruction::i(m, rd, rs1, rs2 as i32),
        Format::I => Instruction::i(m, rd, rs1, imm_i(w)),
        Format::S => Instruction::sb(m, rs1, rs2, imm_s(w)),
        Format::B => Instruction::sb(m, rs1, rs2, imm_b(w)),
        Format::U => Instruction::uj(m, rd, imm_u(w)),
        Format::J => Instruction::uj(m, rd, imm_j(w)),
    };
    Ok(inst)
}

fn in_signed_range(imm: i32, bits: u32) -> bool {
    let lim = 1i64 << (bits - 1);
    (-lim..lim).contains(&(imm as i64))
}

/// Encodes an instruction into its unique 32-bit word.
pub fn encode(i: &Instruction) -> Result<u32, IsaError> {
    let m = i.mnemonic;
    let (use_rd, use_rs1, use_rs2) = m.uses_fields();
    for (name, value, used) in [
        ("rd", i.rd, use_rd),
        ("rs1", i.rs1, use_rs1),
        ("rs2", i.rs2, use_rs2),
    ] {
        if value > 31 || (!used && value != 0) {
            return Err(IsaError::FieldRange {
                mnemonic: m,
                field: name,
                value: value as u32,
            });
        }
    }
    let range_err = Err(IsaError::ImmediateRange {
        mnemonic: m,
        imm: i.imm,
    });

    match m {
        Mnemonic::Ecall | Mnemonic::Ebreak => {
            if i.imm != 0 {
                return range_err;
            }
            return Ok(if m == Mnemonic::Ecall {
                ECALL_WORD
            } else {
                EBREAK_WORD
            });
        }
        _ => {}
    }

    let rd = (i.rd as u32) << 7;
    let rs1 = (i.rs1 as u32) << 15;
    let rs2 = (i.rs2 as u32) << 20;
    let f3 = m.funct3().unwrap_or(0) << 12;
    let f7 = m.funct7().unwrap_or(0) << 25;
    let imm = i.imm as u32;
    let base = m.opcode();

    let word = match m.format() {
        Format::R => {
            if i.imm != 0 {
                return range_err;
            }
            f7 | rs2 | rs1 | f3 | rd | base
        }
        Format::I if m.is_shift_imm() => {
            if !(0..32).contains(&i.imm) {
                return range_err;
            }
            f7 | (imm << 20) | rs1 | f3 | rd | base
        }
        Format::I => {
            if !in_signed_range(i.imm, 12) {
                return range_err;
            }
            ((imm & 0xFFF) << 20) | rs1 | f3 | rd | base
        }
        Format::S => {
            if !in_signed_range(i.imm, 12) {
                return range_err;
            }
            (((imm >> 5) & 0x7F) << 25) | rs2 | rs1 | f3 | ((imm & 0x1F) << 7) | base
        }
        Format::B => {
            if !in_signed_range(i.imm, 13) || i.imm & 1 != 0 {
                return range_err;
            }
            (((imm >> 12) & 1) << 31)
                | (((imm >> 5) & 0x3F) << 25)
                | rs2
                | rs1
                | f3
                | (((imm >> 1) & 0xF) << 8)
                | (((imm >> 11) & 1) << 7)
                | base
        }
        Format::U => {
            if imm & 0xFFF != 0 {
                return range_err;
            }
            imm | rd | base
        }
        Format::J => {
            if !in_signed_range(i.imm, 21) || i.imm & 1 != 0 {
                return range_err;
            }
            (((imm >> 20) & 1) << 31)
                | (((imm >> 1) & 0x3FF) << 21)
                | (((imm >> 11) & 1) << 20)
                | (((imm >> 12) & 0xFF) << 12)
                | rd
                | base
        }
    };
    Ok(word)
}
