use crate::alu::{alu_exec, AluResult};
use crate::control::{generate_signals, AluSrcA, AluSrcB, ControlSignals, MemWidth, WbSrc};
use crate::datapath::{pc_next, ProgramCounter};
use crate::isa::{decode, Instruction, Mnemonic};

use super::{MachineState, Status, TrapKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemAccessKind {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemAccess {
    pub kind: MemAccessKind,
    pub addr: u32,
    pub width: MemWidth,
    /// Loaded value after extension, or the value presented for a store.
    pub value: u32,
}

/// Everything one structural step observed, for tracing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StepEffects {
    pub raw: Option<u32>,
    pub inst: Option<Instruction>,
    /// Effective signals, with `output_enable` as raised by the memory
    /// address decoder.
    pub signals: Option<ControlSignals>,
    pub alu: Option<AluResult>,
    /// Register write that took effect (writes to x0 are dropped).
    pub reg_write: Option<(u8, u32)>,
    pub mem: Option<MemAccess>,
    pub trap: Option<TrapKind>,
}

pub(super) fn step(s: &mut MachineState) -> StepEffects {
    let mut fx = StepEffects::default();
    let pc = s.pc.get();
    s.cycle_count += 1;

    if let Err(trap) = execute(s, pc, &mut fx) {
        fx.trap = Some(trap);
        fx.reg_write = None;
        s.status = Status::from_trap(trap);
    }
    fx
}

fn execute(s: &mut MachineState, pc: u32, fx: &mut StepEffects) -> Result<(), TrapKind> {
    // fetch
    let raw = s.imem.fetch(pc)?;
    fx.raw = Some(raw);

    // decode + control
    let inst = decode(raw).map_err(|_| TrapKind::IllegalInstruction)?;
    fx.inst = Some(inst);
    let mut sig = generate_signals(&inst);
    fx.signals = Some(sig);
    if sig.halt {
        return Err(if inst.mnemonic == Mnemonic::Ebreak {
            TrapKind::Ebreak
        } else {
            TrapKind::Ecall
        });
    }

    // register read + operand muxes
    let (rd1, rd2) = s.rf.read(inst.rs1, inst.rs2);
    let imm = inst.imm as u32;
    let a = match sig.alu_src_a {
        AluSrcA::Reg => rd1,
        AluSrcA::Pc => pc,
    };
    let b = match sig.alu_src_b {
        AluSrcB::Reg => rd2,
        AluSrcB::Imm => imm,
    };
    let alu = alu_exec(sig.alu_op, a, b);
    fx.alu = Some(alu);

    // next pc is resolved before memory so a bad target commits nothing
    let next = pc_next(pc, &sig, &alu, imm, rd1)?;

    // memory
    let port = s.dmem.access(
        alu.value,
        rd2,
        sig.mem_width,
        sig.mem_unsigned,
        sig.mem_read,
        sig.mem_write,
    )?;
    if sig.mem_read || sig.mem_write {
        fx.mem = Some(MemAccess {
            kind: if sig.mem_write {
                MemAccessKind::Write
            } else {
                MemAccessKind::Read
            },
            addr: alu.value,
            width: sig.mem_width,
            value: if sig.mem_write { rd2 } else { port.rd },
        });
    }
    sig.output_enable = port.output_enable;
    fx.signals = Some(sig);

    // write-back
    let wd = match sig.wb_src {
        WbSrc::Alu => alu.value,
        WbSrc::Mem => port.rd,
        WbSrc::PcPlus4 => pc.wrapping_add(4),
        WbSrc::ImmU => imm,
    };
    s.rf.write(inst.rd, wd, sig.reg_write);
    if sig.reg_write && inst.rd != 0 {
        fx.reg_write = Some((inst.rd, wd));
    }

    s.pc = ProgramCounter::new(next).expect("pc_next only returns aligned targets");
    Ok(())
}
