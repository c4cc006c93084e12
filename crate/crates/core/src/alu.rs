//! The arithmetic-logic unit.
//!
//! Addition and subtraction go through the 32-bit carry-lookahead adder;
//! the comparison flags come from the subtraction path's carry and
//! overflow, the way a hardware comparator derives them.

use std::fmt;

use crate::bits::{cla_add, BitVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AluOp {
    Add,
    Sub,
    Sll,
    Srl,
    Sra,
    And,
    Or,
    Xor,
    Slt,
    Sltu,
}

impl AluOp {
    pub const ALL: [AluOp; 10] = [
        AluOp::Add,
        AluOp::Sub,
        AluOp::Sll,
        AluOp::Srl,
        AluOp::Sra,
        AluOp::And,
        AluOp::Or,
        AluOp::Xor,
        AluOp::Slt,
        AluOp::Sltu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AluOp::Add => "ADD",
            AluOp::Sub => "SUB",
            AluOp::Sll => "SLL",
            AluOp::Srl => "SRL",
            AluOp::Sra => "SRA",
            AluOp::And => "AND",
            AluOp::Or => "OR",
            AluOp::Xor => "XOR",
            AluOp::Slt => "SLT",
            AluOp::Sltu => "SLTU",
        }
    }
}

impl fmt::Display for AluOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// ALU output word plus the comparator flags for `a` against `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AluResult {
    pub value: u32,
    pub eq: bool,
    pub lt_signed: bool,
    pub lt_unsigned: bool,
}

fn adder(a: u32, b: u32, cin: bool) -> (u32, bool) {
    let (sum, cout) =
        cla_add(BitVec::word(a), BitVec::word(b), cin).expect("operands are both 32 bits");
    (sum.value(), cout)
}

pub fn alu_exec(op: AluOp, a: u32, b: u32) -> AluResult {
    // a - b = a + !b + 1; carry out set means no borrow.
    let (diff, no_borrow) = adder(a, !b, true);
    let negative = diff >> 31 == 1;
    let overflow = ((a ^ b) & (a ^ diff)) >> 31 == 1;
    let lt_signed = negative != overflow;
    let lt_unsigned = !no_borrow;

    let shamt = b & 0x1F;
    let value = match op {
        AluOp::Add => adder(a, b, false).0,
        AluOp::Sub => diff,
        AluOp::Sll => a << shamt,
        AluOp::Srl => a >> shamt,
        AluOp::Sra => ((a as i32) >> shamt) as u32,
        AluOp::And => a & b,
        AluOp::Or => a | b,
        AluOp::Xor => a ^ b,
        AluOp::Slt => lt_signed as u32,
        AluOp::Sltu => lt_unsigned as u32,
    };
    AluResult {
        value,
        eq: diff == 0,
        lt_signed,
        lt_unsigned,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = alu_exec(AluOp::Sub, 5, 5);
        assert_eq!(r.value, 0);
        assert!(r.eq);
        assert_eq!(alu_exec(AluOp::Sra, 0x8000_0000, 1).value, 0xC000_0000);
        assert_eq!(alu_exec(AluOp::Sltu, 0xFFFF_FFFF, 1).value, 0);
        assert_eq!(alu_exec(AluOp::Slt, 0xFFFF_FFFF, 1).value, 1);
        // shift amount 33 & 31 == 1
        assert_eq!(alu_exec(AluOp::Sll, 1, 33).value, 2);
    }

    #[test]
    fn add_and_sub_wrap() {
        assert_eq!(alu_exec(AluOp::Add, u32::MAX, 1).value, 0);
        assert_eq!(alu_exec(AluOp::Sub, 0, 1).value, u32::MAX);
        assert_eq!(alu_exec(AluOp::Add, 0x7FFF_FFFF, 1).value, 0x8000_0000);
    }

    #[test]
    fn signed_compare_edges() {
        let min = 0x8000_0000u32;
        let max = 0x7FFF_FFFFu32;
        let r = alu_exec(AluOp::Slt, min, max);
        assert_eq!(r.value, 1);
        assert!(!r.lt_unsigned);
        let r = alu_exec(AluOp::Slt, max, min);
        assert_eq!(r.value, 0);
        assert!(r.lt_unsigned);
    }

    #[test]
    fn bitwise() {
        assert_eq!(alu_exec(AluOp::And, 0b1100, 0b1010).value, 0b1000);
        assert_eq!(alu_exec(AluOp::Or, 0b1100, 0b1010).value, 0b1110);
        assert_eq!(alu_exec(AluOp::Xor, 0b1100, 0b1010).value, 0b0110);
        assert_eq!(alu_exec(AluOp::Srl, 0x8000_0000, 31).value, 1);
        assert_eq!(alu_exec(AluOp::Sra, 0x8000_0000, 31).value, u32::MAX);
    }
}
