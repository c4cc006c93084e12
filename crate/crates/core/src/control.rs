//! Control unit: maps a decoded instruction to the datapath's enables and
//! mux selectors.

use crate::alu::AluOp;
use crate::isa::{Format, Instruction, Mnemonic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AluSrcA {
    Reg,
    Pc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AluSrcB {
    Reg,
    Imm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchKind {
    None,
    Beq,
    Bne,
    Blt,
    Bltu,
    Bge,
    Bgeu,
    Jal,
    Jalr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PcSrc {
    Plus4,
    BranchTarget,
    JumpTarget,
    JalrTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WbSrc {
    Alu,
    Mem,
    PcPlus4,
    ImmU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemWidth {
    Byte,
    Half,
    Word,
}

impl MemWidth {
    pub fn bytes(self) -> u32 {
        match self {
            MemWidth::Byte => 1,
            MemWidth::Half => 2,
            MemWidth::Word => 4,
        }
    }
}

/// The control bundle for one instruction.
///
/// `output_enable` is never raised here: it comes from the data-memory
/// address decoder when a store hits the display address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControlSignals {
    pub reg_write: bool,
    pub mem_read: bool,
    pub mem_write: bool,
    pub mem_to_reg: bool,
    pub alu_src_a: AluSrcA,
    pub alu_src_b: AluSrcB,
    pub alu_op: AluOp,
    pub branch_kind: BranchKind,
    pub pc_src: PcSrc,
    pub wb_src: WbSrc,
    pub mem_width: MemWidth,
    pub mem_unsigned: bool,
    pub output_enable: bool,
    pub halt: bool,
}

impl ControlSignals {
    /// All enables low; the next pc is pc + 4.
    pub const IDLE: ControlSignals = ControlSignals {
        reg_write: false,
        mem_read: false,
        mem_write: false,
        mem_to_reg: false,
        alu_src_a: AluSrcA::Reg,
        alu_src_b: AluSrcB::Reg,
        alu_op: AluOp::Add,
        branch_kind: BranchKind::None,
        pc_src: PcSrc::Plus4,
        wb_src: WbSrc::Alu,
        mem_width: MemWidth::Word,
        mem_unsigned: false,
        output_enable: false,
        halt: false,
    };
}

fn alu_row(op: AluOp, src_b: AluSrcB) -> ControlSignals {
    ControlSignals {
        reg_write: true,
        alu_src_b: src_b,
        alu_op: op,
        ..ControlSignals::IDLE
    }
}

fn load_row(width: MemWidth, unsigned: bool) -> ControlSignals {
    ControlSignals {
        reg_write: true,
        mem_read: true,
        mem_to_reg: true,
        alu_src_b: AluSrcB::Imm,
        wb_src: WbSrc::Mem,
        mem_width: width,
        mem_unsigned: unsigned,
        ..ControlSignals::IDLE
    }
}

fn store_row(width: MemWidth) -> ControlSignals {
    ControlSignals {
        mem_write: true,
        alu_src_b: AluSrcB::Imm,
        mem_width: width,
        ..ControlSignals::IDLE
    }
}

fn branch_row(kind: BranchKind) -> ControlSignals {
    ControlSignals {
        alu_op: AluOp::Sub,
        branch_kind: kind,
        pc_src: PcSrc::BranchTarget,
        ..ControlSignals::IDLE
    }
}

/// One row per mnemonic.
pub fn signals_for(m: Mnemonic) -> ControlSignals {
    use AluSrcB::{Imm, Reg};
    use Mnemonic::*;
    match m {
        Add => alu_row(AluOp::Add, Reg),
        Sub => alu_row(AluOp::Sub, Reg),
        Sll => alu_row(AluOp::Sll, Reg),
        Slt => alu_row(AluOp::Slt, Reg),
        Sltu => alu_row(AluOp::Sltu, Reg),
        Xor => alu_row(AluOp::Xor, Reg),
        Srl => alu_row(AluOp::Srl, Reg),
        Sra => alu_row(AluOp::Sra, Reg),
        Or => alu_row(AluOp::Or, Reg),
        And => alu_row(AluOp::And, Reg),
        Addi => alu_row(AluOp::Add, Imm),
        Slti => alu_row(AluOp::Slt, Imm),
        Sltiu => alu_row(AluOp::Sltu, Imm),
        Xori => alu_row(AluOp::Xor, Imm),
        Ori => alu_row(AluOp::Or, Imm),
        Andi => alu_row(AluOp::And, Imm),
        Slli => alu_row(AluOp::Sll, Imm),
        Srli => alu_row(AluOp::Srl, Imm),
        Srai => alu_row(AluOp::Sra, Imm),
        Lui => ControlSignals {
            wb_src: WbSrc::ImmU,
            ..alu_row(AluOp::Add, Imm)
        },
        Auipc => ControlSignals {
            alu_src_a: AluSrcA::Pc,
            ..alu_row(AluOp::Add, Imm)
        },
        Beq => branch_row(BranchKind::Beq),
        Bne => branch_row(BranchKind::Bne),
        Blt => branch_row(BranchKind::Blt),
        Bge => branch_row(BranchKind::Bge),
        Bltu => branch_row(BranchKind::Bltu),
        Bgeu => branch_row(BranchKind::Bgeu),
        Jal => ControlSignals {
            reg_write: true,
            alu_src_a: AluSrcA::Pc,
            alu_src_b: Imm,
            branch_kind: BranchKind::Jal,
            pc_src: PcSrc::JumpTarget,
            wb_src: WbSrc::PcPlus4,
            ..ControlSignals::IDLE
        },
        Jalr => ControlSignals {
            reg_write: true,
            alu_src_b: Imm,
            branch_kind: BranchKind::Jalr,
            pc_src: PcSrc::JalrTarget,
            wb_src: WbSrc::PcPlus4,
            ..ControlSignals::IDLE
        },
        Lb => load_row(MemWidth::Byte, false),
        Lh => load_row(MemWidth::Half, false),
        Lw => load_row(MemWidth::Word, false),
        Lbu => load_row(MemWidth::Byte, true),
        Lhu => load_row(MemWidth::Half, true),
        Sb => store_row(MemWidth::Byte),
        Sh => store_row(MemWidth::Half),
        Sw => store_row(MemWidth::Word),
        Fence => ControlSignals::IDLE,
        Ecall | Ebreak => ControlSignals {
            halt: true,
            ..ControlSignals::IDLE
        },
    }
}

pub fn generate_signals(i: &Instruction) -> ControlSignals {
    signals_for(i.mnemonic)
}

pub const TABLE_HEADER: &str = "mnemonic,format,reg_write,mem_read,mem_write,mem_to_reg,\
alu_src_a,alu_src_b,alu_op,branch_kind,pc_src,wb_src,mem_width,mem_unsigned,output_enable,halt";

fn format_name(f: Format) -> &'static str {
    match f {
        Format::R => "R",
        Format::I => "I",
        Format::S => "S",
        Format::B => "B",
        Format::U => "U",
        Format::J => "J",
    }
}

/// The full control table as CSV, header first, one row per mnemonic.
pub fn control_table_csv() -> String {
    let b = |v: bool| if v { "1" } else { "0" };
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for m in Mnemonic::ALL {
        let s = signals_for(m);
        let row = [
            m.name().to_string(),
            format_name(m.format()).to_string(),
            b(s.reg_write).into(),
            b(s.mem_read).into(),
            b(s.mem_write).into(),
            b(s.mem_to_reg).into(),
            format!("{:?}", s.alu_src_a).to_uppercase(),
            format!("{:?}", s.alu_src_b).to_uppercase(),
            s.alu_op.name().into(),
            format!("{:?}", s.branch_kind).to_uppercase(),
            match s.pc_src {
                PcSrc::Plus4 => "PLUS4",
                PcSrc::BranchTarget => "BRANCH_TARGET",
                PcSrc::JumpTarget => "JUMP_TARGET",
                PcSrc::JalrTarget => "JALR_TARGET",
            }
            .into(),
            match s.wb_src {
                WbSrc::Alu => "ALU",
                WbSrc::Mem => "MEM",
                WbSrc::PcPlus4 => "PC_PLUS_4",
                WbSrc::ImmU => "IMM_U",
            }
            .into(),
            format!("{:?}", s.mem_width).to_uppercase(),
            b(s.mem_unsigned).into(),
            b(s.output_enable).into(),
            b(s.halt).into(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
